use std::path::Path;

use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use sha2::{Digest, Sha256};

use qgem_core::ExperimentConfig;

use crate::config::render;

pub const FILE_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// SHA-256 of the canonical config text.
    pub config_sha256: String,
    pub version: String,
    pub timestamp_utc: String,
    pub outputs: Vec<String>,
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    hex::encode(Sha256::digest(render(cfg).as_bytes()))
}

impl RunManifest {
    pub fn new(subcommand: &str, cfg: &ExperimentConfig, outputs: Vec<String>) -> Self {
        Self {
            subcommand: subcommand.into(),
            config_sha256: config_hash(cfg),
            version: env!("CARGO_PKG_VERSION").into(),
            timestamp_utc: Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true),
            outputs,
        }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(dir.join(FILE_NAME), text + "\n")
    }
}
