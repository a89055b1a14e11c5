//! Run manifest written next to the outputs.

use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::commands::Output;
use crate::config::RunConfig;
use crate::error::CliError;

pub const FILE_NAME: &str = "manifest.toml";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Command-line options that shaped the outputs, as `key=value`.
    pub options: Vec<String>,
    pub seed: u64,
    pub started_unix_s: u64,
    pub elapsed_s: f64,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub config: RunConfig,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Clock started when a run begins.
pub struct RunClock {
    started_unix_s: u64,
    start: Instant,
}

impl RunClock {
    pub fn start() -> Self {
        RunClock {
            started_unix_s: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            start: Instant::now(),
        }
    }
}

pub struct RunRecord<'a> {
    pub command: &'a str,
    pub options: Vec<String>,
    pub config: &'a RunConfig,
    pub inputs: Vec<(String, Vec<u8>)>,
}

impl Manifest {
    pub fn new(record: RunRecord<'_>, outputs: &[Output], clock: &RunClock) -> Self {
        Manifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: record.command.to_string(),
            options: record.options,
            seed: record.config.seed,
            started_unix_s: clock.started_unix_s,
            elapsed_s: clock.start.elapsed().as_secs_f64(),
            inputs: record
                .inputs
                .iter()
                .map(|(name, bytes)| FileDigest {
                    file: name.clone(),
                    sha256: sha256_hex(bytes),
                })
                .collect(),
            outputs: outputs
                .iter()
                .map(|o| FileDigest {
                    file: o.name.clone(),
                    sha256: sha256_hex(&o.bytes),
                })
                .collect(),
            config: record.config.clone(),
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest serializes")
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Data(format!("manifest: {e}")))
    }
}

/// Writes the outputs and the manifest into `dir`.
pub fn write_run(dir: &Path, outputs: &[Output], manifest: &Manifest) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    for o in outputs {
        std::fs::write(dir.join(&o.name), &o.bytes)?;
    }
    std::fs::write(dir.join(FILE_NAME), manifest.to_toml())?;
    Ok(())
}
