//! Command-line front end for `hk-core`: `simulate`, `converge`, `verify`.
//!
//! Exit status: 0 success, 2 configuration error, 3 numerical failure,
//! 4 verification failure.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{run, Cli, Command};
pub use error::{CliError, CliResult};
