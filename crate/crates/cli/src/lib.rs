//! Command-line front end: loads scenario and history files, runs the pricing
//! schemes and their oracles, and writes deterministic JSON reports.

pub mod args;
pub mod commands;
pub mod report;

pub use args::Cli;
pub use commands::{run, CliError};
pub use report::{Check, ErrorReport, RunReport, Verification, SCHEMA_VERSION};
