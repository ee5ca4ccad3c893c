//! Content-addressed record/replay cache for model responses.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Digest over the inputs that determine a response: template, version, case,
/// model and temperature.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ReplayKey(String);

impl ReplayKey {
    pub fn new(
        template_id: &str,
        version: &str,
        case_id: &str,
        model_id: &str,
        temperature: f64,
    ) -> Self {
        // -0.0 and 0.0 are the same decoding setting.
        let temperature = if temperature == 0.0 { 0.0 } else { temperature };
        let mut h = Sha256::new();
        for field in [template_id, version, case_id, model_id] {
            h.update((field.len() as u64).to_le_bytes());
            h.update(field.as_bytes());
        }
        h.update(temperature.to_bits().to_le_bytes());
        ReplayKey(hex::encode(h.finalize()))
    }

    pub fn as_hex(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ReplayKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Sidecar record stored next to each cached response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheEntryMeta {
    pub template_id: String,
    pub version: String,
    pub case_id: String,
    pub model_id: String,
    pub temperature: f64,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub latency_ms: u64,
}

#[derive(Debug, Clone)]
pub struct CachedResponse {
    pub raw_text: String,
    pub meta: Option<CacheEntryMeta>,
}

/// Directory of `<hex>.txt` responses with `<hex>.json` sidecars.
///
/// Reads are lock-free; writes go through a mutex and land via rename so a
/// concurrent reader never observes a partial file.
#[derive(Debug)]
pub struct ReplayCache {
    dir: PathBuf,
    write_lock: Mutex<()>,
}

impl ReplayCache {
    pub fn open(dir: impl Into<PathBuf>) -> std::io::Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            write_lock: Mutex::new(()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn text_path(&self, key: &ReplayKey) -> PathBuf {
        self.dir.join(format!("{}.txt", key.as_hex()))
    }

    fn meta_path(&self, key: &ReplayKey) -> PathBuf {
        self.dir.join(format!("{}.json", key.as_hex()))
    }

    pub fn get(&self, key: &ReplayKey) -> std::io::Result<Option<CachedResponse>> {
        let raw_text = match fs::read_to_string(self.text_path(key)) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e),
        };
        let meta = fs::read_to_string(self.meta_path(key))
            .ok()
            .and_then(|m| serde_json::from_str(&m).ok());
        Ok(Some(CachedResponse { raw_text, meta }))
    }

    pub fn put(
        &self,
        key: &ReplayKey,
        raw_text: &str,
        meta: &CacheEntryMeta,
    ) -> std::io::Result<()> {
        let _guard = self.write_lock.lock().expect("cache lock poisoned");
        let meta_json = serde_json::to_string_pretty(meta).expect("cache meta serializes");
        write_atomic(&self.meta_path(key), meta_json.as_bytes())?;
        write_atomic(&self.text_path(key), raw_text.as_bytes())
    }

    pub fn len(&self) -> usize {
        fs::read_dir(&self.dir)
            .map(|it| {
                it.flatten()
                    .filter(|e| e.path().extension().is_some_and(|x| x == "txt"))
                    .count()
            })
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key() -> ReplayKey {
        ReplayKey::new("uket-final", "v1", "3328920/2017", "gpt-4-32k", 0.0)
    }

    #[test]
    fn key_changes_with_every_field() {
        let base = key();
        let variants = [
            ReplayKey::new("uket-finalx", "v1", "3328920/2017", "gpt-4-32k", 0.0),
            ReplayKey::new("uket-final", "v2", "3328920/2017", "gpt-4-32k", 0.0),
            ReplayKey::new("uket-final", "v1", "3328921/2017", "gpt-4-32k", 0.0),
            ReplayKey::new("uket-final", "v1", "3328920/2017", "gpt-4", 0.0),
            ReplayKey::new("uket-final", "v1", "3328920/2017", "gpt-4-32k", 0.2),
        ];
        for v in variants {
            assert_ne!(v, base);
        }
        assert_eq!(
            ReplayKey::new("uket-final", "v1", "3328920/2017", "gpt-4-32k", -0.0),
            base
        );
    }

    #[test]
    fn field_boundaries_are_unambiguous() {
        assert_ne!(
            ReplayKey::new("ab", "c", "x", "m", 0.0),
            ReplayKey::new("a", "bc", "x", "m", 0.0)
        );
    }

    #[test]
    fn put_then_get() {
        let dir = tempfile::tempdir().unwrap();
        let cache = ReplayCache::open(dir.path()).unwrap();
        assert!(cache.get(&key()).unwrap().is_none());
        let meta = CacheEntryMeta {
            template_id: "uket-final".into(),
            version: "v1".into(),
            case_id: "3328920/2017".into(),
            model_id: "gpt-4-32k".into(),
            temperature: 0.0,
            prompt_tokens: 10,
            completion_tokens: 5,
            latency_ms: 3,
        };
        cache
            .put(&key(), "1. Facts of the case: x\n", &meta)
            .unwrap();
        let got = cache.get(&key()).unwrap().unwrap();
        assert_eq!(got.raw_text, "1. Facts of the case: x\n");
        assert_eq!(got.meta.unwrap(), meta);
        assert_eq!(cache.len(), 1);
    }
}
