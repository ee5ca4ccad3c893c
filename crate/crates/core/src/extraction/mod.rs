//! Parsing raw model responses into eight-section records.

mod label;
mod lint;
mod parse;

use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aspect::Aspect;
use crate::corpus::case_file_stem;
use crate::llm_gateway::cache::write_atomic;

pub use label::{normalize_label, OutcomeLabel};
pub use lint::{lint_record, LintFinding, LintRule, Severity};

#[derive(Debug, Error)]
pub enum ExtractionError {
    #[error("response is empty")]
    EmptyResponse,
    #[error("missing section {} ({})", .0.number(), .0.key())]
    MissingSection(Aspect),
    #[error("section {} ({}) appears more than once", .0.number(), .0.key())]
    AmbiguousSection(Aspect),
    #[error("outcome label {0:?} is not one of the four labels")]
    UnparseableLabel(String),
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

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExtractionError + '_ {
    move |source| ExtractionError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> ExtractionError + '_ {
    move |source| ExtractionError::Json {
        path: path.to_path_buf(),
        source,
    }
}

pub const DEFAULT_ABSENCE_MARKERS: [&str; 4] = [
    "does not provide",
    "no specific references",
    "no references to precedents",
    "not specified in the file",
];

/// Phrases that mark a section as "the judgment says nothing about this".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AbsenceMarkers(Vec<String>);

impl Default for AbsenceMarkers {
    fn default() -> Self {
        Self(
            DEFAULT_ABSENCE_MARKERS
                .iter()
                .map(|s| s.to_string())
                .collect(),
        )
    }
}

impl AbsenceMarkers {
    pub fn new<I, S>(phrases: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self(phrases.into_iter().map(Into::into).collect())
    }

    pub fn phrases(&self) -> &[String] {
        &self.0
    }

    /// True for empty text or text containing any phrase (case-insensitive,
    /// whitespace runs collapsed).
    pub fn detect(&self, text: &str) -> bool {
        let norm = collapse_lower(text);
        norm.is_empty()
            || self
                .0
                .iter()
                .map(|p| collapse_lower(p))
                .any(|p| !p.is_empty() && norm.contains(&p))
    }
}

fn collapse_lower(s: &str) -> String {
    s.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase()
}

/// [`AbsenceMarkers::detect`] with the default phrase list.
pub fn detect_absence(section_text: &str) -> bool {
    AbsenceMarkers::default().detect(section_text)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsenceFlags {
    pub facts: bool,
    pub claims: bool,
    pub statute_refs: bool,
    pub precedent_refs: bool,
    pub general_outcome: bool,
    pub outcome_label: bool,
    pub order_remedies: bool,
    pub reasons: bool,
}

impl AbsenceFlags {
    pub fn get(&self, aspect: Aspect) -> bool {
        *self.slot(aspect)
    }

    pub fn set(&mut self, aspect: Aspect, value: bool) {
        *self.slot_mut(aspect) = value;
    }

    fn slot(&self, aspect: Aspect) -> &bool {
        match aspect {
            Aspect::Facts => &self.facts,
            Aspect::Claims => &self.claims,
            Aspect::StatuteRefs => &self.statute_refs,
            Aspect::PrecedentRefs => &self.precedent_refs,
            Aspect::GeneralOutcome => &self.general_outcome,
            Aspect::OutcomeLabel => &self.outcome_label,
            Aspect::OrderRemedies => &self.order_remedies,
            Aspect::Reasons => &self.reasons,
        }
    }

    fn slot_mut(&mut self, aspect: Aspect) -> &mut bool {
        match aspect {
            Aspect::Facts => &mut self.facts,
            Aspect::Claims => &mut self.claims,
            Aspect::StatuteRefs => &mut self.statute_refs,
            Aspect::PrecedentRefs => &mut self.precedent_refs,
            Aspect::GeneralOutcome => &mut self.general_outcome,
            Aspect::OutcomeLabel => &mut self.outcome_label,
            Aspect::OrderRemedies => &mut self.order_remedies,
            Aspect::Reasons => &mut self.reasons,
        }
    }

    pub fn absent_aspects(&self) -> Vec<Aspect> {
        Aspect::ALL.into_iter().filter(|a| self.get(*a)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtractionRecord {
    pub case_id: String,
    pub facts: String,
    pub claims: String,
    pub statute_refs: String,
    pub precedent_refs: String,
    pub general_outcome: String,
    pub outcome_label: OutcomeLabel,
    pub outcome_label_raw: String,
    pub order_remedies: String,
    pub reasons: String,
    pub absence_flags: AbsenceFlags,
}

impl ExtractionRecord {
    /// Section body as stored. For the label aspect this is the raw label text.
    pub fn section(&self, aspect: Aspect) -> &str {
        match aspect {
            Aspect::Facts => &self.facts,
            Aspect::Claims => &self.claims,
            Aspect::StatuteRefs => &self.statute_refs,
            Aspect::PrecedentRefs => &self.precedent_refs,
            Aspect::GeneralOutcome => &self.general_outcome,
            Aspect::OutcomeLabel => &self.outcome_label_raw,
            Aspect::OrderRemedies => &self.order_remedies,
            Aspect::Reasons => &self.reasons,
        }
    }

    /// Renders the record in the numbered heading dialect. Parsing the output
    /// yields an equal record.
    pub fn to_response_text(&self) -> String {
        let mut out = String::new();
        for aspect in Aspect::ALL {
            if !out.is_empty() {
                out.push_str("\n\n");
            }
            out.push_str(&format!(
                "{}. {}: {}",
                aspect.number(),
                aspect.heading(),
                self.section(aspect)
            ));
        }
        out
    }

    pub fn file_name(case_id: &str) -> String {
        format!("{}.json", case_file_stem(case_id))
    }

    pub fn load(path: &Path) -> Result<Self, ExtractionError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(json_err(path))
    }

    /// Writes `<dir>/<case stem>.json` and returns the path.
    pub fn save_in(&self, dir: &Path) -> Result<PathBuf, ExtractionError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let path = dir.join(Self::file_name(&self.case_id));
        let mut body = serde_json::to_vec_pretty(self).map_err(json_err(&path))?;
        body.push(b'\n');
        write_atomic(&path, &body).map_err(io_err(&path))?;
        Ok(path)
    }
}

/// Parses with the default absence markers.
pub fn parse_extraction(
    case_id: &str,
    raw_text: &str,
) -> Result<ExtractionRecord, ExtractionError> {
    parse_extraction_with(case_id, raw_text, &AbsenceMarkers::default())
}

pub fn parse_extraction_with(
    case_id: &str,
    raw_text: &str,
    markers: &AbsenceMarkers,
) -> Result<ExtractionRecord, ExtractionError> {
    if raw_text.trim().is_empty() {
        return Err(ExtractionError::EmptyResponse);
    }
    let [facts, claims, statute_refs, precedent_refs, general_outcome, label_raw, order_remedies, reasons] =
        parse::split_sections(raw_text)?;
    let outcome_label = label::find_label_in(&label_raw)?;

    let mut record = ExtractionRecord {
        case_id: case_id.to_string(),
        facts,
        claims,
        statute_refs,
        precedent_refs,
        general_outcome,
        outcome_label,
        outcome_label_raw: label_raw,
        order_remedies,
        reasons,
        absence_flags: AbsenceFlags::default(),
    };
    for aspect in Aspect::ALL {
        if aspect != Aspect::OutcomeLabel {
            let flag = markers.detect(record.section(aspect));
            record.absence_flags.set(aspect, flag);
        }
    }
    Ok(record)
}

/// Loads every `*.json` record in `dir`, sorted by case id.
pub fn load_records(dir: &Path) -> Result<Vec<ExtractionRecord>, ExtractionError> {
    let mut records = Vec::new();
    for entry in fs::read_dir(dir).map_err(io_err(dir))? {
        let path = entry.map_err(io_err(dir))?.path();
        if path.extension().is_some_and(|e| e == "json") {
            records.push(ExtractionRecord::load(&path)?);
        }
    }
    records.sort_by(|a, b| a.case_id.cmp(&b.case_id));
    Ok(records)
}

pub fn write_jsonl(path: &Path, records: &[ExtractionRecord]) -> Result<(), ExtractionError> {
    let mut buf = Vec::new();
    for r in records {
        serde_json::to_writer(&mut buf, r).map_err(json_err(path))?;
        buf.write_all(b"\n").map_err(io_err(path))?;
    }
    write_atomic(path, &buf).map_err(io_err(path))
}

pub fn read_jsonl(path: &Path) -> Result<Vec<ExtractionRecord>, ExtractionError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(io_err(path))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line).map_err(json_err(path))?);
        }
    }
    Ok(out)
}
