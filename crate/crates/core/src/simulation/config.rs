//! Study grids read from a TOML file.
//!
//! ```toml
//! seed = 20240501
//! replications = 1000
//!
//! [[study]]
//! name = "power"
//! kind = "power"
//! families = ["RN", "RC", "MLN", "MLC", "SU", "UU"]
//! n = [800]
//! gamma_star = [0.1]
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::dgp::Family;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StudyKind {
    Coverage,
    Bias,
    Size,
    Power,
}

impl StudyKind {
    pub fn name(self) -> &'static str {
        match self {
            StudyKind::Coverage => "coverage",
            StudyKind::Bias => "bias",
            StudyKind::Size => "size",
            StudyKind::Power => "power",
        }
    }

    /// Whether replications run the independence tests.
    pub fn tests(self) -> bool {
        matches!(self, StudyKind::Size | StudyKind::Power)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    pub name: String,
    pub kind: StudyKind,
    pub families: Vec<Family>,
    pub n: Vec<usize>,
    /// Explicit α grid.
    #[serde(default)]
    pub alpha: Option<Vec<f64>>,
    /// γ* targets, each calibrated to a nonnegative α.
    #[serde(default)]
    pub gamma_star: Option<Vec<f64>>,
    /// Confidence level of the intervals.
    #[serde(default = "default_level")]
    pub level: f64,
    /// Test level for size and power.
    #[serde(default = "default_significance")]
    pub significance: f64,
    /// Overrides the global replication count.
    #[serde(default)]
    pub replications: Option<usize>,
}

fn default_level() -> f64 {
    0.9
}

fn default_significance() -> f64 {
    0.10
}

fn default_replications() -> usize {
    1000
}

fn default_mvn_target() -> f64 {
    1e-3
}

fn default_mvn_points() -> usize {
    1 << 14
}

fn default_bins() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// Master seed; the command line may override it.
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_replications")]
    pub replications: usize,
    /// Error target of the multivariate normal CDF inside the γ* test.
    #[serde(default = "default_mvn_target")]
    pub mvn_target_error: f64,
    #[serde(default = "default_mvn_points")]
    pub mvn_max_points: usize,
    #[serde(default = "default_bins")]
    pub histogram_bins: usize,
    #[serde(rename = "study")]
    pub studies: Vec<StudySpec>,
}

impl SimulationConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SimulationConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path.as_ref())?)
    }

    fn validate(&self) -> Result<()> {
        if self.studies.is_empty() {
            return Err(Error::Parse("config defines no [[study]] section".into()));
        }
        if self.replications == 0 {
            return Err(Error::Parse("replications must be positive".into()));
        }
        if !(self.mvn_target_error > 0.0) || self.mvn_max_points == 0 || self.histogram_bins == 0 {
            return Err(Error::Parse("mvn_target_error, mvn_max_points and histogram_bins must be positive".into()));
        }
        let mut names = std::collections::BTreeSet::new();
        for s in &self.studies {
            let ctx = |msg: &str| Error::Parse(format!("study '{}': {msg}", s.name));
            if s.name.is_empty() || !s.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(ctx("name must be non-empty and use only letters, digits, '-' and '_'"));
            }
            if !names.insert(s.name.as_str()) {
                return Err(ctx("duplicate study name"));
            }
            if s.families.is_empty() || s.n.is_empty() {
                return Err(ctx("families and n must be non-empty"));
            }
            if s.n.iter().any(|&n| n < 2) {
                return Err(ctx("every n must be at least 2"));
            }
            if s.alpha.is_some() && s.gamma_star.is_some() {
                return Err(ctx("give either alpha or gamma_star, not both"));
            }
            if s.alpha.is_none() && s.gamma_star.is_none() && s.kind != StudyKind::Size {
                return Err(ctx("needs an alpha or gamma_star grid"));
            }
            if !(s.level > 0.0 && s.level < 1.0) || !(s.significance > 0.0 && s.significance < 1.0) {
                return Err(ctx("level and significance must lie in (0, 1)"));
            }
            if s.replications == Some(0) {
                return Err(ctx("replications must be positive"));
            }
        }
        Ok(())
    }
}
