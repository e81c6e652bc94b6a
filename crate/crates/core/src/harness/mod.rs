//! Experiment runner: seeded trials over an instance family, one CSV row
//! per selector per trial, and per-algorithm summaries.
//!
//! Trial `t` uses seed `split_seed(master_seed, t)`; the instance, the
//! shared sample and each selector draw from fixed sub-streams of it.

mod config;
mod run;
mod summary;

pub use config::{Algorithm, ExperimentConfig, Family, OptMode};
pub use run::{
    generate_instance, instance_file, run_trial, run_trials, TrialInstance, TrialReport, TrialRow, CSV_VERSION,
};
pub use summary::{per_doubling_factors, summarize, AlgorithmSummary, Summary};
