use crate::config::RunConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RunManifest {
    pub config_hash: String,
    pub seed: u64,
    pub tool_version: String,
    pub subcommand: String,
    /// Unix time the run started.
    pub started: u64,
    /// Filled in when the run completes.
    pub wall_clock_secs: Option<f64>,
    pub sequential: bool,
    pub threads: usize,
    pub config: RunConfig,
    /// Subcommand to artifact paths, relative to the output directory.
    pub artifacts: BTreeMap<String, Vec<String>>,
}

/// SHA-256 of the canonical text of the semantic config fields.
pub fn config_hash(c: &RunConfig) -> String {
    let digest = Sha256::digest(c.semantic_text().as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(c: &RunConfig, subcommand: &str, sequential: bool, threads: usize) -> Self {
        let started = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        Self {
            config_hash: config_hash(c),
            seed: c.seed,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            subcommand: subcommand.into(),
            started,
            wall_clock_secs: None,
            sequential,
            threads,
            config: c.clone(),
            artifacts: BTreeMap::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(self)?)
    }

    pub fn read(dir: &Path) -> anyhow::Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json"))?)?)
    }
}
