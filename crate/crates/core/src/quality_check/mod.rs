//! Two-part human quality check: per-aspect accuracy scores, then suitability
//! for outcome prediction and whether the case is dominated by procedure.

pub mod rubric;
mod store;

use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::aspect::Aspect;

pub use store::{AnnotationStore, QcError, StoredAnnotation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectScore {
    pub aspect: Aspect,
    pub score: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QualityAnnotation {
    pub case_id: String,
    pub part1: Vec<AspectScore>,
    pub part2_suitable: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub part2_procedural: Option<u8>,
    pub annotator_id: String,
    pub annotated_at: DateTime<Utc>,
    #[serde(default)]
    pub notes: String,
}

impl QualityAnnotation {
    /// Builds an annotation with the eight scores given in aspect order.
    pub fn from_scores(
        case_id: impl Into<String>,
        scores: [u8; 8],
        suitable: u8,
        procedural: Option<u8>,
        annotator_id: impl Into<String>,
        annotated_at: DateTime<Utc>,
    ) -> Self {
        Self {
            case_id: case_id.into(),
            part1: Aspect::ALL
                .into_iter()
                .zip(scores)
                .map(|(aspect, score)| AspectScore { aspect, score })
                .collect(),
            part2_suitable: suitable,
            part2_procedural: procedural,
            annotator_id: annotator_id.into(),
            annotated_at,
            notes: String::new(),
        }
    }

    pub fn score(&self, aspect: Aspect) -> Option<u8> {
        self.part1
            .iter()
            .find(|s| s.aspect == aspect)
            .map(|s| s.score)
    }

    pub fn is_suitable(&self) -> bool {
        self.part2_suitable == 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    EmptyCaseId,
    EmptyAnnotator,
    MissingAspect {
        aspect: Aspect,
    },
    DuplicateAspect {
        aspect: Aspect,
    },
    NonBinaryScore {
        aspect: Aspect,
        score: u8,
    },
    NonBinarySuitable {
        value: u8,
    },
    NonBinaryProcedural {
        value: u8,
    },
    /// procedural bit recorded for an unsuitable case
    ProceduralWithoutSuitable,
    /// suitable case with no procedural bit
    ProceduralMissing,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyCaseId => write!(f, "case_id is empty"),
            Violation::EmptyAnnotator => write!(f, "annotator_id is empty"),
            Violation::MissingAspect { aspect } => write!(f, "missing aspect: {aspect}"),
            Violation::DuplicateAspect { aspect } => write!(f, "duplicate aspect: {aspect}"),
            Violation::NonBinaryScore { aspect, score } => {
                write!(f, "score for {aspect} must be 0 or 1, got {score}")
            }
            Violation::NonBinarySuitable { value } => {
                write!(f, "part2_suitable must be 0 or 1, got {value}")
            }
            Violation::NonBinaryProcedural { value } => {
                write!(f, "part2_procedural must be 0 or 1, got {value}")
            }
            Violation::ProceduralWithoutSuitable => write!(
                f,
                "gating: part2_procedural must be absent when part2_suitable is 0"
            ),
            Violation::ProceduralMissing => write!(
                f,
                "gating: part2_procedural is required when part2_suitable is 1"
            ),
        }
    }
}

/// Returns every violated rule, in a stable order. An empty list means valid.
pub fn validate_annotation(a: &QualityAnnotation) -> Vec<Violation> {
    let mut out = Vec::new();
    if a.case_id.trim().is_empty() {
        out.push(Violation::EmptyCaseId);
    }
    if a.annotator_id.trim().is_empty() {
        out.push(Violation::EmptyAnnotator);
    }

    let mut seen: BTreeMap<Aspect, usize> = BTreeMap::new();
    for s in &a.part1 {
        *seen.entry(s.aspect).or_default() += 1;
        if s.score > 1 {
            out.push(Violation::NonBinaryScore {
                aspect: s.aspect,
                score: s.score,
            });
        }
    }
    for aspect in Aspect::ALL {
        match seen.get(&aspect) {
            None => out.push(Violation::MissingAspect { aspect }),
            Some(&n) if n > 1 => out.push(Violation::DuplicateAspect { aspect }),
            _ => {}
        }
    }

    if a.part2_suitable > 1 {
        out.push(Violation::NonBinarySuitable {
            value: a.part2_suitable,
        });
    }
    match (a.part2_suitable, a.part2_procedural) {
        (0, Some(_)) => out.push(Violation::ProceduralWithoutSuitable),
        (1, None) => out.push(Violation::ProceduralMissing),
        _ => {}
    }
    if let Some(p) = a.part2_procedural.filter(|p| *p > 1) {
        out.push(Violation::NonBinaryProcedural { value: p });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EligibilityClass {
    NotPredictable,
    ProceduralOnly,
    Substantive,
}

impl fmt::Display for EligibilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EligibilityClass::NotPredictable => "not_predictable",
            EligibilityClass::ProceduralOnly => "procedural_only",
            EligibilityClass::Substantive => "substantive",
        })
    }
}

pub fn derive_eligibility(a: &QualityAnnotation) -> Result<EligibilityClass, Vec<Violation>> {
    let violations = validate_annotation(a);
    if !violations.is_empty() {
        return Err(violations);
    }
    Ok(match (a.part2_suitable, a.part2_procedural) {
        (1, Some(1)) => EligibilityClass::ProceduralOnly,
        (1, _) => EligibilityClass::Substantive,
        _ => EligibilityClass::NotPredictable,
    })
}
