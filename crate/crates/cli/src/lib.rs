//! Command-line driver for casimir-lab: scenario files, verification suites
//! and their JSON reports.

pub mod app;
pub mod checks;
pub mod config;
pub mod error;
pub mod fields;
pub mod report;
pub mod suites;

pub use app::{execute, run, verify, Cli, Outcome};
pub use config::{load_config, parse_config, Kind, Scenario};
pub use error::{CliError, ConfigError};
pub use report::Report;
