//! Command-line front end: argument definitions, CSV plumbing and the
//! simulation-study harness.

pub mod args;
pub mod commands;
pub mod error;
pub mod io;
pub mod repro;

pub use error::{CliError, CliResult};
