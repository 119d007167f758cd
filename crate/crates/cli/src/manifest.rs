//! Run manifests: a snapshot of everything that determines the numerical
//! output (command, seed, config), hashed so every emitted data file can
//! reference the run that produced it.

use clusterkit::Result;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    /// Seconds since the Unix epoch; informational, excluded from the hash.
    pub created_unix: u64,
    /// Command-line arguments after the program name.
    pub command: Vec<String>,
    /// Fully resolved seed (after config / environment fallback).
    pub seed: u64,
    pub config: BTreeMap<String, String>,
    /// SHA-256 over (tool_version, command, seed, config).
    pub hash: String,
}

impl RunManifest {
    pub fn new(command: Vec<String>, seed: u64, config: BTreeMap<String, String>) -> Self {
        let tool_version = env!("CARGO_PKG_VERSION").to_string();
        let mut hasher = Sha256::new();
        hasher.update(tool_version.as_bytes());
        for arg in &command {
            hasher.update([0u8]);
            hasher.update(arg.as_bytes());
        }
        hasher.update(seed.to_le_bytes());
        for (k, v) in &config {
            hasher.update([1u8]);
            hasher.update(k.as_bytes());
            hasher.update([2u8]);
            hasher.update(v.as_bytes());
        }
        let hash = hasher
            .finalize()
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        Self {
            tool_version,
            created_unix: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            command,
            seed,
            config,
            hash,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_depends_on_inputs_not_time() {
        let cfg: BTreeMap<String, String> =
            [("mc.samples".to_string(), "100".to_string())].into();
        let a = RunManifest::new(vec!["identity".into()], 1, cfg.clone());
        let b = RunManifest::new(vec!["identity".into()], 1, cfg.clone());
        assert_eq!(a.hash, b.hash);
        let c = RunManifest::new(vec!["identity".into()], 2, cfg);
        assert_ne!(a.hash, c.hash);
    }
}
