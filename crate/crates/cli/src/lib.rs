//! Experiment runner for the `freelunch` binary: config ingestion, sweeps,
//! CSV and SVG output, and the validation suite.

pub mod config;
pub mod plot;
pub mod run;
pub mod validate;

pub use config::{parse_config, ConfigError, Mode, RunConfig};
pub use run::RunError;
