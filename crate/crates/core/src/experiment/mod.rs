//! Experiment configs, the scenario registry and parallel sweeps.

mod config;
mod scenarios;
mod sweep;

pub use config::{
    AnalysisOptions, CheckOptions, ExperimentConfig, Instance, ObjectiveSpec, SetSpec,
};
pub use scenarios::{scenario, SCENARIOS};
pub use sweep::{run_job, run_label, summarize, sweep, RunSummary};

/// Environment variable naming the root directory for run outputs.
pub const OUTPUT_ROOT_ENV: &str = "FWLDS_OUTPUT_ROOT";
