use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Everything needed to rerun a command and check that its input is unchanged.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub input: String,
    pub input_sha256: String,
    pub seed: Option<u64>,
    pub version: &'static str,
    pub budgets: Budgets,
    pub timing: Timing,
}

#[derive(Debug, Default, Serialize)]
pub struct Budgets {
    pub max_k_real: usize,
    pub max_categories_nominal: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_max_k_real: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_max_categories_nominal: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mvn_target_error: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mvn_max_points: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mvn_randomizations: Option<usize>,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub elapsed_seconds: f64,
    pub threads: usize,
}

impl RunManifest {
    pub fn new(argv: &[String], input: &Path, bytes: &[u8], seed: Option<u64>, budgets: Budgets, started: Instant) -> Self {
        RunManifest {
            command: argv.to_vec(),
            input: input.display().to_string(),
            input_sha256: hex::encode(Sha256::digest(bytes)),
            seed,
            version: env!("CARGO_PKG_VERSION"),
            budgets,
            timing: Timing {
                elapsed_seconds: started.elapsed().as_secs_f64(),
                threads: rayon::current_num_threads(),
            },
        }
    }
}
