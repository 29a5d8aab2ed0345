//! Configuration-driven experiment orchestration behind the `voterlab` CLI.

pub mod config;
pub mod experiments;
pub mod plot;

pub use config::{ExperimentConfig, ExperimentKind, RawConfig};
pub use experiments::{run_experiment, ExperimentReport};
