//! Command-line surface of `ptho-core`: coupling sweeps, degeneracy tables,
//! grid spectra, metric dumps, factorizations, evolution traces and
//! verification reports as CSV, JSON or plain text.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use cli::{execute, run, Cli};
pub use error::CliError;
pub use output::{OutputFormat, Report};
