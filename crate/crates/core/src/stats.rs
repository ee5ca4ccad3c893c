//! Accuracy proportions with 95% intervals, suitability rates and the Rule 21
//! occurrence report.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aspect::Aspect;
use crate::extraction::ExtractionRecord;
use crate::quality_check::{validate_annotation, QualityAnnotation};

pub const Z_95: f64 = 1.96;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("no trials")]
    NoTrials,
    #[error("successes {successes} exceed trials {trials}")]
    TooManySuccesses { successes: u64, trials: u64 },
    #[error("annotation for {0} has no extraction record")]
    DanglingReference(String),
    #[error("annotation for {case_id} is invalid: {message}")]
    InvalidAnnotation { case_id: String, message: String },
    #[error("case {0} has no page count")]
    UnknownCase(String),
    #[error("more than one annotation for {0}")]
    DuplicateAnnotation(String),
    #[error("unknown interval method {0:?} (expected wald or sample-wide)")]
    UnknownMethod(String),
}

/// Rounds half-up to 3 decimals. Only used for display and for the sample-wide method.
pub fn round3(x: f64) -> f64 {
    (x * 1000.0 + 0.5).floor() / 1000.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionEstimate {
    pub successes: u64,
    pub trials: u64,
    pub p: f64,
    pub half_width: f64,
}

impl ProportionEstimate {
    pub fn is_degenerate(&self) -> bool {
        self.successes == 0 || self.successes == self.trials
    }

    /// `"p ± hw"` at 3 dp, or bare `"p"` when p is 0 or 1.
    pub fn formatted(&self) -> String {
        if self.is_degenerate() {
            format!("{:.3}", round3(self.p))
        } else {
            format!("{:.3} ± {:.3}", round3(self.p), round3(self.half_width))
        }
    }
}

impl fmt::Display for ProportionEstimate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.formatted())
    }
}

fn check(successes: u64, trials: u64) -> Result<(), StatsError> {
    if trials == 0 {
        return Err(StatsError::NoTrials);
    }
    if successes > trials {
        return Err(StatsError::TooManySuccesses { successes, trials });
    }
    Ok(())
}

/// Normal-approximation (Wald) interval: `1.96 * sqrt(p(1-p)/n)`.
///
/// The variance is evaluated as `s(n-s)/n^3` so that `s` and `n-s` give
/// bit-identical half-widths.
pub fn accuracy_ci(successes: u64, trials: u64) -> Result<ProportionEstimate, StatsError> {
    check(successes, trials)?;
    let p = successes as f64 / trials as f64;
    let half_width = if successes == 0 || successes == trials {
        0.0
    } else {
        let n = trials as f64;
        let spread = successes as u128 * (trials - successes) as u128;
        Z_95 * (spread as f64 / (n * n * n)).sqrt()
    };
    Ok(ProportionEstimate {
        successes,
        trials,
        p,
        half_width,
    })
}

/// How table half-widths are computed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalMethod {
    /// Plain Wald over the column's own trials.
    Wald,
    /// Wald with p first rounded to 3 dp and the variance taken over the whole
    /// annotated sample, for every column. This is the convention that
    /// reproduces the published accuracy table cell for cell.
    #[default]
    SampleWide,
}

impl fmt::Display for IntervalMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            IntervalMethod::Wald => "wald",
            IntervalMethod::SampleWide => "sample-wide",
        })
    }
}

impl FromStr for IntervalMethod {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "wald" => Ok(IntervalMethod::Wald),
            "sample-wide" => Ok(IntervalMethod::SampleWide),
            other => Err(StatsError::UnknownMethod(other.to_string())),
        }
    }
}

/// Estimate for one table cell. `sample_size` is the total annotated count,
/// used only by [`IntervalMethod::SampleWide`].
pub fn cell_estimate(
    successes: u64,
    trials: u64,
    sample_size: u64,
    method: IntervalMethod,
) -> Result<ProportionEstimate, StatsError> {
    let wald = accuracy_ci(successes, trials)?;
    match method {
        IntervalMethod::Wald => Ok(wald),
        IntervalMethod::SampleWide => {
            if sample_size == 0 {
                return Err(StatsError::NoTrials);
            }
            let pr = round3(wald.p);
            let half_width = if wald.is_degenerate() {
                0.0
            } else {
                Z_95 * (pr * (1.0 - pr) / sample_size as f64).sqrt()
            };
            Ok(ProportionEstimate { half_width, ..wald })
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subset {
    #[default]
    All,
    Suitable,
}

impl FromStr for Subset {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "all" => Ok(Subset::All),
            "suitable" | "suitable-only" => Ok(Subset::Suitable),
            other => Err(format!(
                "unknown subset {other:?} (expected all or suitable)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub aspect: Aspect,
    pub label: String,
    pub all: ProportionEstimate,
    pub all_formatted: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suitable: Option<ProportionEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suitable_formatted: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub method: IntervalMethod,
    pub all_trials: u64,
    /// `None` when no annotated case is suitable.
    pub suitable_trials: Option<u64>,
    pub rows: Vec<AccuracyRow>,
}

impl AccuracyTable {
    pub fn row(&self, aspect: Aspect) -> &AccuracyRow {
        &self.rows[aspect as usize]
    }

    pub fn render_text(&self, subset: Option<Subset>) -> String {
        let show_all = subset != Some(Subset::Suitable);
        let show_suitable = subset != Some(Subset::All) && self.suitable_trials.is_some();
        let mut header = vec![format!("{:<44}", "aspect")];
        if show_all {
            header.push(format!("{:<16}", format!("all ({})", self.all_trials)));
        }
        if show_suitable {
            header.push(format!(
                "{:<16}",
                format!("suitable ({})", self.suitable_trials.unwrap_or(0))
            ));
        }
        let mut out = header.concat().trim_end().to_string();
        out.push('\n');
        for r in &self.rows {
            let mut line = format!("{:<44}", format!("({}) {}", r.aspect.number(), r.label));
            if show_all {
                line.push_str(&format!("{:<16}", r.all_formatted));
            }
            if show_suitable {
                line.push_str(&format!(
                    "{:<16}",
                    r.suitable_formatted.as_deref().unwrap_or("-")
                ));
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

fn checked_annotations<'a>(
    annotations: &'a [QualityAnnotation],
    record_ids: &BTreeSet<&str>,
) -> Result<Vec<&'a QualityAnnotation>, StatsError> {
    let mut seen = BTreeSet::new();
    for a in annotations {
        let violations = validate_annotation(a);
        if let Some(v) = violations.first() {
            return Err(StatsError::InvalidAnnotation {
                case_id: a.case_id.clone(),
                message: v.to_string(),
            });
        }
        if !record_ids.contains(a.case_id.as_str()) {
            return Err(StatsError::DanglingReference(a.case_id.clone()));
        }
        if !seen.insert(a.case_id.as_str()) {
            return Err(StatsError::DuplicateAnnotation(a.case_id.clone()));
        }
    }
    Ok(annotations.iter().collect())
}

fn successes(annotations: &[&QualityAnnotation], aspect: Aspect) -> u64 {
    annotations
        .iter()
        .filter(|a| a.score(aspect) == Some(1))
        .count() as u64
}

/// One column: per-aspect estimates over all annotations or the suitable ones.
pub fn summarize(
    annotations: &[QualityAnnotation],
    records: &[ExtractionRecord],
    subset: Subset,
    method: IntervalMethod,
) -> Result<Vec<ProportionEstimate>, StatsError> {
    let ids: BTreeSet<&str> = records.iter().map(|r| r.case_id.as_str()).collect();
    let all = checked_annotations(annotations, &ids)?;
    let sample_size = all.len() as u64;
    let chosen: Vec<&QualityAnnotation> = match subset {
        Subset::All => all,
        Subset::Suitable => all.into_iter().filter(|a| a.is_suitable()).collect(),
    };
    let n = chosen.len() as u64;
    Aspect::ALL
        .into_iter()
        .map(|aspect| cell_estimate(successes(&chosen, aspect), n, sample_size, method))
        .collect()
}

/// Both columns. Errors when there are no annotations at all.
pub fn accuracy_table(
    annotations: &[QualityAnnotation],
    records: &[ExtractionRecord],
    method: IntervalMethod,
) -> Result<AccuracyTable, StatsError> {
    let all = summarize(annotations, records, Subset::All, method)?;
    let suitable = match summarize(annotations, records, Subset::Suitable, method) {
        Ok(col) => Some(col),
        Err(StatsError::NoTrials) => None,
        Err(e) => return Err(e),
    };
    let rows = Aspect::ALL
        .into_iter()
        .map(|aspect| {
            let a = all[aspect as usize];
            let s = suitable.as_ref().map(|c| c[aspect as usize]);
            AccuracyRow {
                aspect,
                label: aspect.table_label().to_string(),
                all: a,
                all_formatted: a.formatted(),
                suitable: s,
                suitable_formatted: s.map(|e| e.formatted()),
            }
        })
        .collect();
    Ok(AccuracyTable {
        method,
        all_trials: all[0].trials,
        suitable_trials: suitable.as_ref().map(|c| c[0].trials),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuitabilityReport {
    pub annotated: u64,
    pub suitable: u64,
    pub proportion: f64,
    /// Percentage at one decimal, e.g. `"47.7%"`.
    pub percent: String,
    pub multipage_suitable: u64,
}

/// Counts suitable cases and how many of them run past one page.
pub fn suitability_rate(
    annotations: &[QualityAnnotation],
    page_counts: &BTreeMap<String, u32>,
) -> Result<SuitabilityReport, StatsError> {
    if annotations.is_empty() {
        return Err(StatsError::NoTrials);
    }
    let mut suitable = 0u64;
    let mut multipage = 0u64;
    for a in annotations.iter().filter(|a| a.is_suitable()) {
        suitable += 1;
        let pages = page_counts
            .get(&a.case_id)
            .ok_or_else(|| StatsError::UnknownCase(a.case_id.clone()))?;
        if *pages > 1 {
            multipage += 1;
        }
    }
    let proportion = suitable as f64 / annotations.len() as f64;
    let tenths = (proportion * 1000.0 + 0.5).floor() / 10.0;
    Ok(SuitabilityReport {
        annotated: annotations.len() as u64,
        suitable,
        proportion,
        percent: format!("{tenths:.1}%"),
        multipage_suitable: multipage,
    })
}

pub const DEFAULT_RULE21_PHRASES: [&str; 4] = ["rule 21", "r. 21", "r 21", "r.21"];

/// Case-insensitive, token-bounded matcher for Rule 21 mentions.
#[derive(Debug, Clone)]
pub struct Rule21Detector {
    phrases: Vec<String>,
    regex: Regex,
}

impl Default for Rule21Detector {
    fn default() -> Self {
        Self::new(DEFAULT_RULE21_PHRASES).expect("default phrases compile")
    }
}

impl Rule21Detector {
    pub fn new<I, S>(phrases: I) -> Result<Self, regex::Error>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let phrases: Vec<String> = phrases.into_iter().map(Into::into).collect();
        let mut alts: Vec<String> = phrases
            .iter()
            .filter(|p| !p.trim().is_empty())
            .map(|p| phrase_pattern(p.trim()))
            .collect();
        // longest first so "rule 21" wins over "r 21" at the same position
        alts.sort_by_key(|a| std::cmp::Reverse(a.len()));
        let pattern = if alts.is_empty() {
            "[^\\s\\S]".to_string()
        } else {
            format!("(?i)(?:{})", alts.join("|"))
        };
        Ok(Self {
            phrases,
            regex: Regex::new(&pattern)?,
        })
    }

    pub fn phrases(&self) -> &[String] {
        &self.phrases
    }

    pub fn matches(&self, text: &str) -> bool {
        self.regex.is_match(text)
    }
}

fn phrase_pattern(phrase: &str) -> String {
    let body = phrase
        .split_whitespace()
        .map(regex::escape)
        .collect::<Vec<_>>()
        .join(r"\s+");
    let word = |c: Option<char>| c.is_some_and(|c| c.is_alphanumeric() || c == '_');
    let lead = if word(phrase.chars().next()) {
        r"\b"
    } else {
        ""
    };
    let trail = if word(phrase.chars().last()) {
        r"\b"
    } else {
        ""
    };
    format!("{lead}{body}{trail}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule21Pattern {
    pub case_id: String,
    pub facts: bool,
    pub statute_refs: bool,
    pub reasons: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule21Report {
    pub total_cases: u64,
    pub facts_statutes_reasons: u64,
    pub statutes_only: u64,
    pub statutes_and_reasons_not_facts: u64,
    pub other_patterns: Vec<Rule21Pattern>,
}

pub fn rule21_report(records: &[ExtractionRecord], detector: &Rule21Detector) -> Rule21Report {
    let mut report = Rule21Report {
        total_cases: 0,
        facts_statutes_reasons: 0,
        statutes_only: 0,
        statutes_and_reasons_not_facts: 0,
        other_patterns: Vec::new(),
    };
    let mut sorted: Vec<&ExtractionRecord> = records.iter().collect();
    sorted.sort_by(|a, b| a.case_id.cmp(&b.case_id));
    for r in sorted {
        let f = detector.matches(&r.facts);
        let s = detector.matches(&r.statute_refs);
        let rs = detector.matches(&r.reasons);
        if !(f || s || rs) {
            continue;
        }
        report.total_cases += 1;
        match (f, s, rs) {
            (true, true, true) => report.facts_statutes_reasons += 1,
            (false, true, false) => report.statutes_only += 1,
            (false, true, true) => report.statutes_and_reasons_not_facts += 1,
            _ => report.other_patterns.push(Rule21Pattern {
                case_id: r.case_id.clone(),
                facts: f,
                statute_refs: s,
                reasons: rs,
            }),
        }
    }
    report
}
