//! Command-line front end: configuration, versioned CSV files, run
//! manifests and the subcommands themselves.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod table;

pub use commands::{Output, SeriesModel, SynthKind};
pub use config::RunConfig;
pub use error::CliError;
