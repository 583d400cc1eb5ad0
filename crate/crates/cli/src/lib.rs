//! Configuration parsing and orchestration behind the `tkl` binary.

pub mod config;
pub mod run;

pub use config::{parse_config, ConfigError, ExperimentConfig, GammaSetting, Suite};
pub use run::{header_table, run, RunOutcome};
