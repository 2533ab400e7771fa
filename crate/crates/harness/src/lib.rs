//! Experiment orchestration for single-layer QAOA and the partition greedy
//! algorithm on bounded-degree CSPs.
//!
//! An [`ExperimentConfig`] (TOML) names an instance family, angles, seeds and
//! tolerances. Runners fan replications out over a worker pool with seeds
//! derived from the master seed, so a [`ResultRecord`] depends only on the
//! config.

pub mod config;
pub mod error;
pub mod experiments;
pub mod family;
pub mod record;

pub use config::{ExperimentConfig, ExperimentKind};
pub use error::{HarnessError, Result};
pub use experiments::{
    generate, run, run_ensemble_2xor, run_greedy_study, run_lambda_min, run_scan_d, run_scan_g,
    run_validate, run_variance_study,
};
pub use record::{Aggregate, Check, ResultRecord, Row};
