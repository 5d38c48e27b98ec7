//! Config-driven experiment runner on top of `hardylab`.

pub mod config;
pub mod output;
pub mod report;
pub mod run;

pub use config::{load_config, parse_config, Command, ConfigError, ExperimentConfig};
pub use report::{Check, Outcome, RunError, RunReport};
pub use run::{estimate, run, run_file};
