//! Run manifests: written before a run starts and finalised after it ends.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::Config;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    /// SHA-256 of the canonical configuration text.
    pub config_hash: String,
    pub code_version: String,
    pub seed: u64,
    pub started_unix: f64,
    pub finished_unix: Option<f64>,
    pub status: String,
    pub exit_code: Option<i32>,
    pub outputs: Vec<String>,
}

fn now() -> f64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0)
}

/// Hash of every key except `[output].dir`, which does not affect results.
pub fn config_hash(cfg: &Config) -> String {
    let mut c = cfg.clone();
    c.output.dir = PathBuf::new();
    Sha256::digest(c.render().as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn begin(subcommand: &str, cfg: &Config, seed: u64) -> Self {
        RunManifest {
            subcommand: subcommand.to_string(),
            config_hash: config_hash(cfg),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            seed,
            started_unix: now(),
            finished_unix: None,
            status: "running".into(),
            exit_code: None,
            outputs: Vec::new(),
        }
    }

    pub fn finish(&mut self, status: &str, exit_code: i32, outputs: &[PathBuf]) {
        self.finished_unix = Some(now());
        self.status = status.to_string();
        self.exit_code = Some(exit_code);
        self.outputs = outputs
            .iter()
            .map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default())
            .collect();
    }

    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        std::fs::write(dir.join(MANIFEST_FILE), text + "\n")
    }

    pub fn read(dir: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
        serde_json::from_str(&text).map_err(std::io::Error::other)
    }
}
