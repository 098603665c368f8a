//! Command-line front end: orchestration, Table-style report rendering,
//! structured JSON output, and SVG episode plots on top of `bubble-core`.

pub mod commands;
pub mod plot;
pub mod report;

pub use commands::{exit_code, run, Cli, CliError};
