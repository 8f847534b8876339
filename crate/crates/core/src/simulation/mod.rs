//! Data-generating families, their population γ*, and Monte Carlo studies.

mod config;
mod dgp;
mod output;
mod study;
mod truth;

pub use config::{SimulationConfig, StudyKind, StudySpec};
pub use dgp::{cell_probabilities, generate, mlogit_probabilities, DgpSpec, Family};
pub use output::{fmt_sig, write_tsv, TSV_COLUMNS};
pub use study::{
    ks_critical_1pct, ks_uniform, mix_seed, replication_rng, run_simulation, run_study, study_grid, RunSettings,
    StudyResult, StudyRow,
};
pub use truth::{calibrate_alpha, population_h, population_h_monte_carlo, true_gamma_fixed, true_gamma_star};
