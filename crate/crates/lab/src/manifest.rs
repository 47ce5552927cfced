//! `manifest.json`: config snapshot, stage seeds and timings, output digests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::error::LabError;

pub const MANIFEST: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub seed: u64,
    pub seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: ExperimentConfig,
    pub code_version: String,
    pub workers: usize,
    pub stages: BTreeMap<String, StageRecord>,
    /// Relative path to hex sha256.
    pub outputs: BTreeMap<String, String>,
}

/// Per-stage seed: the first eight bytes of `sha256(master_seed || stage)`.
pub fn stage_seed(master_seed: u64, stage: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update(stage.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> std::io::Result<()> {
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else if path.strip_prefix(root).map(|p| p != Path::new(MANIFEST)).unwrap_or(false) {
            out.push(path);
        }
    }
    Ok(())
}

pub fn digest_outputs(root: &Path) -> Result<BTreeMap<String, String>, LabError> {
    let mut files = Vec::new();
    collect_files(root, root, &mut files)?;
    let mut map = BTreeMap::new();
    for f in files {
        let rel = f.strip_prefix(root).expect("under root").to_string_lossy().replace('\\', "/");
        map.insert(rel, sha256_hex(&std::fs::read(&f)?));
    }
    Ok(map)
}

/// Merges `stages` into the manifest in `root` and refreshes every digest.
pub fn update_manifest(
    root: &Path,
    config: &ExperimentConfig,
    workers: usize,
    stages: &[(String, StageRecord)],
) -> Result<RunManifest, LabError> {
    let path = root.join(MANIFEST);
    let mut manifest = std::fs::read_to_string(&path)
        .ok()
        .and_then(|s| serde_json::from_str::<RunManifest>(&s).ok())
        .filter(|m| &m.config == config)
        .unwrap_or_else(|| RunManifest {
            config: config.clone(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            workers,
            stages: BTreeMap::new(),
            outputs: BTreeMap::new(),
        });
    manifest.workers = workers;
    for (name, rec) in stages {
        manifest.stages.insert(name.clone(), rec.clone());
    }
    manifest.outputs = digest_outputs(root)?;
    std::fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stage_seeds_differ_and_repeat() {
        assert_eq!(stage_seed(1, "simulate"), stage_seed(1, "simulate"));
        assert_ne!(stage_seed(1, "simulate"), stage_seed(1, "audit"));
        assert_ne!(stage_seed(1, "simulate"), stage_seed(2, "simulate"));
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }
}
