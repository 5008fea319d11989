//! Experiment harness: configuration, pipeline, artifacts and the `riskunlearn` CLI.

pub mod checkpoint;
pub mod cli;
pub mod config;
pub mod error;
pub mod pipeline;
pub mod report;
pub mod seeds;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use pipeline::{run_experiment, RunArtifacts};
pub use report::{emit_plot_data, emit_report, Format};
