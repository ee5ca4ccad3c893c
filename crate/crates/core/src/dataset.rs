//! Outcome-prediction dataset export: facts and claims in, outcome label out.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extraction::{ExtractionRecord, OutcomeLabel};
use crate::llm_gateway::cache::write_atomic;
use crate::quality_check::{derive_eligibility, EligibilityClass, QualityAnnotation};

/// Sentences shorter than this (after trimming) are ignored by the leakage guard.
pub const MIN_SENTENCE_CHARS: usize = 25;

pub const SKIP_LEAKAGE: &str = "leakage-guard";
pub const SKIP_NO_RECORD: &str = "missing-record";
pub const SKIP_INVALID: &str = "invalid-annotation";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("no cases are exportable under policy {0}")]
    EmptyExport(ExportPolicy),
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

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionExample {
    pub case_id: String,
    pub input_facts: String,
    pub input_claims: String,
    pub target_label: OutcomeLabel,
    pub eligibility: EligibilityClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExportPolicy {
    ProceduralInclusive,
    SubstantiveOnly,
}

impl ExportPolicy {
    pub fn admits(self, class: EligibilityClass) -> bool {
        match self {
            ExportPolicy::ProceduralInclusive => class != EligibilityClass::NotPredictable,
            ExportPolicy::SubstantiveOnly => class == EligibilityClass::Substantive,
        }
    }
}

impl fmt::Display for ExportPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExportPolicy::ProceduralInclusive => "procedural-inclusive",
            ExportPolicy::SubstantiveOnly => "substantive-only",
        })
    }
}

impl FromStr for ExportPolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "procedural-inclusive" => Ok(ExportPolicy::ProceduralInclusive),
            "substantive-only" => Ok(ExportPolicy::SubstantiveOnly),
            other => Err(format!(
                "unknown policy {other:?} (expected procedural-inclusive or substantive-only)"
            )),
        }
    }
}

/// Splits on `.`, `!`, `?` and line breaks; keeps pieces of at least
/// [`MIN_SENTENCE_CHARS`] characters after trimming.
pub fn sentences(text: &str) -> Vec<&str> {
    text.split(['.', '!', '?', '\n', '\r'])
        .map(str::trim)
        .filter(|s| s.chars().count() >= MIN_SENTENCE_CHARS)
        .collect()
}

/// Sentences of reasons, general outcome or order that reappear verbatim in the
/// facts or claims. `Ok` when there are none.
pub fn leakage_check(record: &ExtractionRecord) -> Result<(), Vec<String>> {
    let mut offending = Vec::new();
    let mut seen = BTreeSet::new();
    for source in [
        &record.reasons,
        &record.general_outcome,
        &record.order_remedies,
    ] {
        for s in sentences(source) {
            if (record.facts.contains(s) || record.claims.contains(s)) && seen.insert(s) {
                offending.push(s.to_string());
            }
        }
    }
    if offending.is_empty() {
        Ok(())
    } else {
        Err(offending)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedCase {
    pub case_id: String,
    pub reason: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportManifest {
    pub policy: ExportPolicy,
    pub output: String,
    pub exported: usize,
    pub per_label: BTreeMap<OutcomeLabel, usize>,
    pub per_class: BTreeMap<EligibilityClass, usize>,
    pub excluded_by_policy: usize,
    pub skipped: Vec<SkippedCase>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Selection {
    pub examples: Vec<PredictionExample>,
    pub excluded_by_policy: usize,
    pub skipped: Vec<SkippedCase>,
}

/// Picks the examples a policy admits, sorted by case id. Cases that fail the
/// leakage guard, lack a record, or carry an invalid annotation are skipped.
pub fn select(
    records: &[ExtractionRecord],
    annotations: &[QualityAnnotation],
    policy: ExportPolicy,
) -> Selection {
    let by_id: BTreeMap<&str, &ExtractionRecord> =
        records.iter().map(|r| (r.case_id.as_str(), r)).collect();
    let mut sorted: Vec<&QualityAnnotation> = annotations.iter().collect();
    sorted.sort_by(|a, b| a.case_id.cmp(&b.case_id));

    let mut sel = Selection {
        examples: Vec::new(),
        excluded_by_policy: 0,
        skipped: Vec::new(),
    };
    let skip = |case_id: &str, reason: &str, details: Vec<String>| {
        tracing::warn!(case_id, reason, "skipping case");
        SkippedCase {
            case_id: case_id.to_string(),
            reason: reason.to_string(),
            details,
        }
    };
    for a in sorted {
        let class = match derive_eligibility(a) {
            Ok(c) => c,
            Err(v) => {
                let details = v.iter().map(|x| x.to_string()).collect();
                sel.skipped.push(skip(&a.case_id, SKIP_INVALID, details));
                continue;
            }
        };
        if !policy.admits(class) {
            sel.excluded_by_policy += 1;
            continue;
        }
        let Some(record) = by_id.get(a.case_id.as_str()) else {
            sel.skipped
                .push(skip(&a.case_id, SKIP_NO_RECORD, Vec::new()));
            continue;
        };
        if let Err(offending) = leakage_check(record) {
            sel.skipped.push(skip(&a.case_id, SKIP_LEAKAGE, offending));
            continue;
        }
        sel.examples.push(PredictionExample {
            case_id: record.case_id.clone(),
            input_facts: record.facts.clone(),
            input_claims: record.claims.clone(),
            target_label: record.outcome_label,
            eligibility: class,
        });
    }
    sel
}

/// `dataset.jsonl` -> `dataset.manifest.json`.
pub fn manifest_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "dataset".into());
    out.with_file_name(format!("{stem}.manifest.json"))
}

/// Writes the JSONL dataset to `out` and the manifest beside it.
pub fn export(
    records: &[ExtractionRecord],
    annotations: &[QualityAnnotation],
    policy: ExportPolicy,
    out: &Path,
) -> Result<ExportManifest, DatasetError> {
    let sel = select(records, annotations, policy);
    if sel.examples.is_empty() {
        return Err(DatasetError::EmptyExport(policy));
    }

    let mut body = Vec::new();
    for ex in &sel.examples {
        serde_json::to_writer(&mut body, ex).map_err(|source| DatasetError::Json {
            path: out.to_path_buf(),
            source,
        })?;
        body.push(b'\n');
    }

    let mut per_label = BTreeMap::new();
    let mut per_class = BTreeMap::new();
    for ex in &sel.examples {
        *per_label.entry(ex.target_label).or_insert(0) += 1;
        *per_class.entry(ex.eligibility).or_insert(0) += 1;
    }
    let manifest = ExportManifest {
        policy,
        output: out
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
        exported: sel.examples.len(),
        per_label,
        per_class,
        excluded_by_policy: sel.excluded_by_policy,
        skipped: sel.skipped,
    };

    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|source| DatasetError::Io {
            path: parent.to_path_buf(),
            source,
        })?;
    }
    write_atomic(out, &body).map_err(|source| DatasetError::Io {
        path: out.to_path_buf(),
        source,
    })?;
    let mpath = manifest_path(out);
    let mut mbody = serde_json::to_vec_pretty(&manifest).map_err(|source| DatasetError::Json {
        path: mpath.clone(),
        source,
    })?;
    mbody.push(b'\n');
    write_atomic(&mpath, &mbody).map_err(|source| DatasetError::Io {
        path: mpath,
        source,
    })?;
    Ok(manifest)
}
