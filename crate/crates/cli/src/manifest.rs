//! Run manifests: what was run, with which code, and checksums of what it
//! wrote.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use condensate::trajectory::SimConfig;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: &'static str,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_traj: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    pub configs: Vec<SimConfig>,
    pub started_unix_s: u64,
    pub duration_s: f64,
    /// File name → lowercase hex SHA-256.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: impl Into<String>, seed: u64) -> Self {
        let started_unix_s = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            command: command.into(),
            version: env!("CARGO_PKG_VERSION"),
            seed,
            n_traj: None,
            workers: None,
            configs: Vec::new(),
            started_unix_s,
            duration_s: 0.0,
            outputs: BTreeMap::new(),
        }
    }

    pub fn record_output(&mut self, path: &Path, bytes: &[u8]) {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        self.outputs.insert(name, hex::encode(Sha256::digest(bytes)));
    }

    pub fn finish(&mut self, elapsed: Duration) {
        self.duration_s = elapsed.as_secs_f64();
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        std::fs::write(path, text)
    }
}

/// Writes `bytes` to `path` and records its checksum.
pub fn write_output(manifest: &mut RunManifest, path: PathBuf, bytes: Vec<u8>) -> std::io::Result<()> {
    std::fs::write(&path, &bytes)?;
    manifest.record_output(&path, &bytes);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksum_of_empty_input() {
        let mut m = RunManifest::new("test", 1);
        m.record_output(Path::new("dir/a.csv"), b"");
        assert_eq!(
            m.outputs["a.csv"],
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
