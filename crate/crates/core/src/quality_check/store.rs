//! File-backed annotation store, one JSON document per case.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{validate_annotation, QualityAnnotation, Violation};
use crate::corpus::case_file_stem;
use crate::llm_gateway::cache::write_atomic;

#[derive(Debug, Error)]
pub enum QcError {
    #[error("annotation for {case_id} is invalid: {}", join(.violations))]
    Invalid {
        case_id: String,
        violations: Vec<Violation>,
    },
    #[error("stale version for {case_id}: expected {expected}, store is at {current}")]
    Conflict {
        case_id: String,
        expected: u64,
        current: u64,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn join(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// What sits on disk: the annotation plus its version counter (1 for the first write).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StoredAnnotation {
    pub version: u64,
    pub annotation: QualityAnnotation,
}

#[derive(Debug)]
pub struct AnnotationStore {
    dir: PathBuf,
    locks: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl AnnotationStore {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self, QcError> {
        let dir = dir.into();
        fs::create_dir_all(&dir).map_err(|source| QcError::Io {
            path: dir.clone(),
            source,
        })?;
        Ok(Self {
            dir,
            locks: Mutex::new(HashMap::new()),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, case_id: &str) -> PathBuf {
        self.dir.join(format!("{}.json", case_file_stem(case_id)))
    }

    fn lock_for(&self, case_id: &str) -> Arc<Mutex<()>> {
        let mut locks = self.locks.lock().unwrap_or_else(|e| e.into_inner());
        locks.entry(case_id.to_string()).or_default().clone()
    }

    pub fn load(&self, case_id: &str) -> Result<Option<StoredAnnotation>, QcError> {
        read_file(&self.path_for(case_id))
    }

    /// Current version for a case, 0 when nothing is stored.
    pub fn version(&self, case_id: &str) -> Result<u64, QcError> {
        Ok(self.load(case_id)?.map_or(0, |s| s.version))
    }

    /// Validates and writes `a` if the stored version equals `expected_version`.
    /// Returns the new version.
    pub fn store(&self, a: &QualityAnnotation, expected_version: u64) -> Result<u64, QcError> {
        let violations = validate_annotation(a);
        if !violations.is_empty() {
            return Err(QcError::Invalid {
                case_id: a.case_id.clone(),
                violations,
            });
        }
        let lock = self.lock_for(&a.case_id);
        let _guard = lock.lock().unwrap_or_else(|e| e.into_inner());

        let current = self.version(&a.case_id)?;
        if current != expected_version {
            return Err(QcError::Conflict {
                case_id: a.case_id.clone(),
                expected: expected_version,
                current,
            });
        }
        let stored = StoredAnnotation {
            version: current + 1,
            annotation: a.clone(),
        };
        let path = self.path_for(&a.case_id);
        let mut body = serde_json::to_vec_pretty(&stored).map_err(|source| QcError::Json {
            path: path.clone(),
            source,
        })?;
        body.push(b'\n');
        write_atomic(&path, &body).map_err(|source| QcError::Io { path, source })?;
        Ok(stored.version)
    }

    /// Every stored annotation, sorted by case id.
    pub fn load_all(&self) -> Result<Vec<StoredAnnotation>, QcError> {
        let entries = fs::read_dir(&self.dir).map_err(|source| QcError::Io {
            path: self.dir.clone(),
            source,
        })?;
        let mut out = Vec::new();
        for entry in entries {
            let path = entry
                .map_err(|source| QcError::Io {
                    path: self.dir.clone(),
                    source,
                })?
                .path();
            if path.extension().is_some_and(|e| e == "json") {
                if let Some(s) = read_file(&path)? {
                    out.push(s);
                }
            }
        }
        out.sort_by(|a, b| a.annotation.case_id.cmp(&b.annotation.case_id));
        Ok(out)
    }

    pub fn annotated_ids(&self) -> Result<BTreeSet<String>, QcError> {
        Ok(self
            .load_all()?
            .into_iter()
            .map(|s| s.annotation.case_id)
            .collect())
    }

    /// Sampled ids that have no stored annotation, in sample order.
    pub fn list_pending(&self, sample: &[String]) -> Result<Vec<String>, QcError> {
        let done = self.annotated_ids()?;
        Ok(sample
            .iter()
            .filter(|id| !done.contains(*id))
            .cloned()
            .collect())
    }
}

fn read_file(path: &Path) -> Result<Option<StoredAnnotation>, QcError> {
    match fs::read_to_string(path) {
        Ok(text) => serde_json::from_str(&text)
            .map(Some)
            .map_err(|source| QcError::Json {
                path: path.to_path_buf(),
                source,
            }),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(source) => Err(QcError::Io {
            path: path.to_path_buf(),
            source,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::Utc;

    fn ann(id: &str) -> QualityAnnotation {
        QualityAnnotation::from_scores(id, [1; 8], 1, Some(0), "a1", Utc::now())
    }

    #[test]
    fn store_then_load() {
        let dir = tempfile::tempdir().unwrap();
        let store = AnnotationStore::open(dir.path()).unwrap();
        let a = ann("10/2019");
        assert_eq!(store.store(&a, 0).unwrap(), 1);
        let got = store.load("10/2019").unwrap().unwrap();
        assert_eq!(got.annotation, a);
        assert_eq!(got.version, 1);
        assert!(dir.path().join("10_2019.json").exists());
    }

    #[test]
    fn stale_version_conflicts() {
        let dir = tempfile::tempdir().unwrap();
        let store = AnnotationStore::open(dir.path()).unwrap();
        let a = ann("x");
        store.store(&a, 0).unwrap();
        let err = store.store(&a, 0).unwrap_err();
        assert!(matches!(
            err,
            QcError::Conflict {
                current: 1,
                expected: 0,
                ..
            }
        ));
        assert_eq!(store.store(&a, 1).unwrap(), 2);
    }

    #[test]
    fn invalid_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let store = AnnotationStore::open(dir.path()).unwrap();
        let mut a = ann("x");
        a.part2_suitable = 0;
        assert!(matches!(store.store(&a, 0), Err(QcError::Invalid { .. })));
        assert!(store.load("x").unwrap().is_none());
    }

    #[test]
    fn pending_queue() {
        let dir = tempfile::tempdir().unwrap();
        let store = AnnotationStore::open(dir.path()).unwrap();
        let sample: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        store.store(&ann("b"), 0).unwrap();
        assert_eq!(store.list_pending(&sample).unwrap(), vec!["a", "c"]);
    }

    #[test]
    fn concurrent_writers_one_wins() {
        let dir = tempfile::tempdir().unwrap();
        let store = Arc::new(AnnotationStore::open(dir.path()).unwrap());
        let handles: Vec<_> = (0..8)
            .map(|_| {
                let store = store.clone();
                std::thread::spawn(move || store.store(&ann("race"), 0).is_ok())
            })
            .collect();
        let wins = handles
            .into_iter()
            .map(|h| h.join().unwrap())
            .filter(|ok| *ok)
            .count();
        assert_eq!(wins, 1);
        assert_eq!(store.version("race").unwrap(), 1);
    }
}
