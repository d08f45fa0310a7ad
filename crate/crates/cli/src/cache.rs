//! File cache keyed by a hash of the experiment kind and resolved inputs.

use std::path::{Path, PathBuf};

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::output::{write_atomic, Outcome};

pub struct Cache {
    dir: Option<PathBuf>,
}

impl Cache {
    pub fn disabled() -> Self {
        Cache { dir: None }
    }

    /// Opens `dir`, creating it if needed. An unusable directory disables
    /// the cache with a warning.
    pub fn open(dir: Option<&Path>) -> Self {
        let Some(dir) = dir else {
            return Self::disabled();
        };
        let usable = std::fs::create_dir_all(dir).and_then(|_| tempfile::NamedTempFile::new_in(dir).map(drop));
        match usable {
            Ok(()) => Cache {
                dir: Some(dir.to_path_buf()),
            },
            Err(e) => {
                eprintln!("warning: cache disabled, {} is not writable: {e}", dir.display());
                Self::disabled()
            }
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.dir.is_some()
    }

    /// Hex SHA-256 of the canonical JSON of `(kind, params, version)`.
    pub fn key(kind: &str, params: &Value) -> String {
        let canonical = serde_json::json!({
            "kind": kind,
            "params": params,
            "version": tqc_core::VERSION,
        });
        let bytes = serde_json::to_vec(&canonical).expect("JSON values always serialize");
        hex::encode(Sha256::digest(&bytes))
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    pub fn get_bytes(&self, key: &str) -> Option<Vec<u8>> {
        std::fs::read(self.path(key)?).ok()
    }

    pub fn get(&self, key: &str) -> Option<Outcome> {
        let bytes = self.get_bytes(key)?;
        match serde_json::from_slice(&bytes) {
            Ok(outcome) => Some(outcome),
            Err(e) => {
                eprintln!("warning: ignoring unreadable cache entry {key}: {e}");
                None
            }
        }
    }

    pub fn put(&self, key: &str, outcome: &Outcome) {
        let Some(path) = self.path(key) else { return };
        let bytes = serde_json::to_vec(outcome).expect("outcomes always serialize");
        if let Err(e) = write_atomic(&path, &bytes) {
            eprintln!("warning: could not write cache entry {}: {e:#}", path.display());
        }
    }
}
