//! Command-line front end for the `hillsym` integrators: single
//! integrations, monodromy reports, parameter scans and convergence
//! studies, each written as CSV with one `#` metadata line.

pub mod args;
pub mod commands;
pub mod error;
pub mod output;

pub use args::{Cli, Command};
pub use commands::run;
pub use error::{CliError, Result, EXIT_CONFIG, EXIT_NUMERICAL};
