//! On-disk member cache, one JSON file per key.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::MemberMetrics;
use crate::graph::RegularMultigraph;
use crate::ARTIFACT_VERSION;

#[derive(Serialize, Deserialize)]
struct Entry {
    key: String,
    artifact_version: String,
    metrics: MemberMetrics,
}

/// `sha256(export ‖ settings ‖ artifact version)`, hex encoded. `settings`
/// is any canonical serialization of everything else that affects the
/// member's metrics.
pub fn cache_key(g: &RegularMultigraph, settings: &str) -> String {
    let mut h = Sha256::new();
    h.update(g.to_export().as_bytes());
    h.update(b"\0settings\0");
    h.update(settings.as_bytes());
    h.update(b"\0version\0");
    h.update(ARTIFACT_VERSION.as_bytes());
    hex::encode(h.finalize())
}

#[derive(Clone, Debug)]
pub struct Cache {
    dir: PathBuf,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct GcStats {
    pub kept: usize,
    pub removed: usize,
}

impl Cache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Cache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    /// A hit requires the stored key and artifact version to match exactly.
    pub fn get(&self, key: &str) -> Option<MemberMetrics> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        let entry: Entry = serde_json::from_str(&text).ok()?;
        (entry.key == key && entry.artifact_version == ARTIFACT_VERSION).then_some(entry.metrics)
    }

    /// Writes through a temporary file and renames, so readers never see a
    /// partial entry.
    pub fn put(&self, key: &str, metrics: &MemberMetrics) -> io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let entry = Entry {
            key: key.to_string(),
            artifact_version: ARTIFACT_VERSION.to_string(),
            metrics: metrics.clone(),
        };
        let tmp = self.dir.join(format!(".{key}.tmp"));
        fs::write(&tmp, serde_json::to_vec(&entry).map_err(io::Error::other)?)?;
        fs::rename(tmp, self.path(key))
    }

    /// Removes unreadable entries, entries from other artifact versions and
    /// leftover temporary files.
    pub fn gc(&self) -> io::Result<GcStats> {
        let mut stats = GcStats::default();
        let entries = match fs::read_dir(&self.dir) {
            Ok(e) => e,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(stats),
            Err(e) => return Err(e),
        };
        for entry in entries {
            let path = entry?.path();
            let name = path
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or_default();
            let keep = if name.ends_with(".tmp") {
                false
            } else if let Some(key) = name.strip_suffix(".json") {
                self.get(key).is_some()
            } else {
                continue;
            };
            if keep {
                stats.kept += 1;
            } else {
                fs::remove_file(&path)?;
                stats.removed += 1;
            }
        }
        Ok(stats)
    }
}
