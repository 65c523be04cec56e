//! Command-line front end: model files, run reports and subcommands.

pub mod commands;
pub mod error;
pub mod model_file;
pub mod report;

pub use commands::run_cli;
pub use error::{CliError, Result};
