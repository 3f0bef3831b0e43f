//! Scenario ingestion, the batch driver, and output emission.

use std::path::PathBuf;

use thiserror::Error;

pub mod config;
pub mod engine;
pub mod output;
pub mod report;
pub mod sweep;

pub use config::{load_scenario, parse_scenario, resolve, ScenarioConfig, ScenarioFile, UNION_SUBSET};
pub use engine::{simulate, simulate_with_threads, Evaluation, NavMetrics, Simulation, Visibility};
pub use output::{format_g6, quantize};
pub use report::{run, run_with_threads, RunOutcome, RunReport};
pub use sweep::{parse_sweep, sweep, SweepRange, SweepRow};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error in {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("invalid `{field}`: {constraint}")]
    Validation { field: String, constraint: String },
    #[error("missing file for `{field}`: {}", path.display())]
    MissingFile { field: String, path: PathBuf },
    #[error("i/o error on {}: {reason}", path.display())]
    Io { path: PathBuf, reason: String },
    #[error("at epoch {epoch}, satellite {satellite}: {message}")]
    Runtime { epoch: String, satellite: String, message: String },
}

impl ScenarioError {
    /// Errors caused by the input rather than by the run itself.
    pub fn is_validation(&self) -> bool {
        matches!(self, Self::Parse { .. } | Self::Validation { .. } | Self::MissingFile { .. })
    }
}
