//! Content-addressed result cache: one JSON file per
//! `(command, parameters, version)` key.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliResult;
use crate::output::VERSION;

#[derive(Debug, Clone)]
pub struct Cache {
    dir: Option<PathBuf>,
}

pub fn cache_key(command: &str, parameters: &BTreeMap<String, String>) -> String {
    #[derive(Serialize)]
    struct Key<'a> {
        command: &'a str,
        parameters: &'a BTreeMap<String, String>,
        version: &'a str,
    }
    let text = serde_json::to_string(&Key {
        command,
        parameters,
        version: VERSION,
    })
    .expect("string map serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl Cache {
    pub fn new(dir: Option<&Path>) -> Self {
        Self {
            dir: dir.map(Path::to_path_buf),
        }
    }

    fn entry(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    /// A corrupt or unreadable entry counts as a miss.
    pub fn load<T: DeserializeOwned>(&self, key: &str) -> Option<T> {
        let text = fs::read_to_string(self.entry(key)?).ok()?;
        serde_json::from_str(&text).ok()
    }

    pub fn store<T: Serialize>(&self, key: &str, value: &T) -> CliResult<()> {
        let Some(path) = self.entry(key) else {
            return Ok(());
        };
        let dir = path.parent().expect("entry has a parent");
        fs::create_dir_all(dir)?;
        let tmp = dir.join(format!(".{key}.{}.tmp", std::process::id()));
        fs::write(&tmp, serde_json::to_string(value)?)?;
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn key_is_stable_and_order_free() {
        let mut a = BTreeMap::new();
        a.insert("n".to_string(), "2".to_string());
        a.insert("m".to_string(), "4".to_string());
        let mut b = BTreeMap::new();
        b.insert("m".to_string(), "4".to_string());
        b.insert("n".to_string(), "2".to_string());
        assert_eq!(cache_key("x", &a), cache_key("x", &b));
        assert_ne!(cache_key("x", &a), cache_key("y", &a));
        assert_eq!(cache_key("x", &a).len(), 64);
    }

    #[test]
    fn round_trip_and_disabled() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(Some(dir.path()));
        cache.store("k", &vec![0.1f64, 1.0 / 3.0]).unwrap();
        assert_eq!(cache.load::<Vec<f64>>("k").unwrap(), vec![0.1, 1.0 / 3.0]);
        assert!(cache.load::<Vec<f64>>("missing").is_none());
        let off = Cache::new(None);
        off.store("k", &1).unwrap();
        assert!(off.load::<i32>("k").is_none());
    }
}
