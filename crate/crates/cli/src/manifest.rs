//! Run manifests: enough to reproduce every artifact of a command.

use std::path::Path;

use kinlab::Result;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const MANIFEST_VERSION: &str = "kinlab-manifest/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    /// Verification finished with failed checks.
    Failed,
    Diverged,
}

/// Written next to the artifacts. No timings or host data, so reruns are
/// byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub command: String,
    /// SHA-256 of the canonical config JSON after flag overrides.
    pub config_sha256: String,
    pub seed: u64,
    pub library_version: String,
    pub cli_version: String,
    pub status: RunStatus,
    /// Last step whose state was finite, when the run diverged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_good_step: Option<usize>,
    pub artifacts: Vec<String>,
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

impl Manifest {
    pub fn new(command: &str, canonical_config: &str, seed: u64) -> Self {
        Self {
            version: MANIFEST_VERSION.into(),
            command: command.into(),
            config_sha256: sha256_hex(canonical_config),
            seed,
            library_version: kinlab::VERSION.into(),
            cli_version: env!("CARGO_PKG_VERSION").into(),
            status: RunStatus::Ok,
            last_good_step: None,
            artifacts: Vec::new(),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sha256_of_abc() {
        assert_eq!(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
