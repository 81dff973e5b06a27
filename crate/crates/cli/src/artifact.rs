//! Output files with reproducibility metadata.

use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::Failure;

/// Seed and configuration hash stamped on every artifact.
pub struct Meta {
    command: &'static str,
    seed: u64,
    config: serde_json::Value,
    hash: String,
}

impl Meta {
    pub fn new(command: &'static str, seed: u64, config: &impl Serialize) -> Result<Self, Failure> {
        let value = serde_json::to_value(config).map_err(|e| Failure::Runtime(e.to_string()))?;
        Self::from_value(command, seed, value)
    }

    pub fn from_value(command: &'static str, seed: u64, config: serde_json::Value) -> Result<Self, Failure> {
        // serde_json maps are ordered, so the encoding is canonical.
        let canonical = serde_json::to_string(&serde_json::json!({ "command": command, "config": &config }))
            .map_err(|e| Failure::Runtime(e.to_string()))?;
        let hash = Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        Ok(Self {
            command,
            seed,
            config,
            hash,
        })
    }

    /// `#`-prefixed header lines.
    pub fn header(&self) -> String {
        format!(
            "# lowsnr {}\n# seed={}\n# config_sha256={}\n# config={}\n",
            self.command, self.seed, self.hash, self.config
        )
    }

    pub fn json(&self) -> serde_json::Value {
        serde_json::json!({
            "command": self.command,
            "seed": self.seed,
            "config_sha256": self.hash,
            "config": self.config,
        })
    }
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(meta: &Meta, columns: &[&str]) -> Self {
        let mut text = meta.header();
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, fields: &[String]) {
        self.text.push_str(&fields.join(","));
        self.text.push('\n');
    }

    pub fn save(&self, path: &Path) -> Result<(), Failure> {
        write(path, &self.text)
    }
}

pub fn write(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}
