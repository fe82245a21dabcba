//! Library side of the `graspid` command: configuration, subcommands and
//! exit-code mapping.

pub mod commands;
pub mod config;
pub mod error;

pub use config::RunConfig;
pub use error::{CliError, CliResult};

/// Exit status of `recognize` when the budget ran out first.
pub const EXIT_NOT_CONVERGED: i32 = 4;

/// Prints a line to stdout. A closed pipe is not an error.
pub fn emit(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}
