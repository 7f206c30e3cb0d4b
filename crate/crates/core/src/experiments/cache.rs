//! Content-addressed on-disk store for computed results.
//!
//! Entries are JSON files named by the SHA-256 of a key record. Writes go
//! through a temporary file and an atomic rename, so concurrent readers
//! never observe a partial entry and racing writers of one key leave a
//! single complete file.

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Bumped whenever cached numerics change meaning.
const CACHE_SCHEMA: u32 = 1;

#[derive(Debug, Clone)]
pub struct ResultCache {
    root: PathBuf,
}

impl ResultCache {
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(ResultCache { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Hex digest identifying `(kind, payload)`.
    pub fn key<K: Serialize>(kind: &str, payload: &K) -> Result<String> {
        let body = serde_json::to_vec(payload)?;
        let mut h = Sha256::new();
        h.update(format!("esqpt-cache/{CACHE_SCHEMA}/{kind}\0").as_bytes());
        h.update(&body);
        Ok(hex::encode(h.finalize()))
    }

    fn path(&self, key: &str) -> PathBuf {
        self.root.join(&key[..2]).join(format!("{key}.json"))
    }

    pub fn get<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        let text = fs::read(self.path(key)).ok()?;
        match serde_json::from_slice(&text) {
            Ok(v) => Some(v),
            Err(e) => {
                log::warn!("ignoring unreadable cache entry {key}: {e}");
                None
            }
        }
    }

    pub fn put<T: Serialize>(&self, key: &str, value: &T) -> Result<()> {
        let path = self.path(key);
        let dir = path.parent().expect("cache entries live in a subdirectory");
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
        tmp.write_all(&serde_json::to_vec(value)?)
            .map_err(|e| Error::io(tmp.path(), e))?;
        tmp.persist(&path).map_err(|e| Error::io(&path, e.error))?;
        Ok(())
    }

    /// Cached value for `key`, computing and storing it on a miss.
    pub fn get_or_compute<T, F>(&self, key: &str, compute: F) -> Result<T>
    where
        T: Serialize + DeserializeOwned,
        F: FnOnce() -> Result<T>,
    {
        if let Some(v) = self.get(key) {
            return Ok(v);
        }
        let v = compute()?;
        self.put(key, &v)?;
        Ok(v)
    }
}

/// Run `compute` through the cache when one is given.
pub fn cached<K, T, F>(cache: Option<&ResultCache>, kind: &str, key: &K, compute: F) -> Result<T>
where
    K: Serialize,
    T: Serialize + DeserializeOwned,
    F: FnOnce() -> Result<T>,
{
    match cache {
        Some(c) => c.get_or_compute(&ResultCache::key(kind, key)?, compute),
        None => compute(),
    }
}
