//! Consistency lints over parsed records.
//!
//! | rule | severity | fires when |
//! |------|----------|------------|
//! | L1   | warning  | facts, general outcome or reasons talk about a withdrawal and the label is `other` |
//! | L2   | error    | any section says the remaining parties "can be similarly organised" |
//! | L3   | warning  | reasons is not flagged absent yet holds no alphabetic text |

use std::fmt;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{ExtractionRecord, OutcomeLabel};
use crate::aspect::Aspect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LintRule {
    #[serde(rename = "L1")]
    WithdrawalLabel,
    #[serde(rename = "L2")]
    Truncation,
    #[serde(rename = "L3")]
    EmptyReasons,
}

impl LintRule {
    pub const ALL: [LintRule; 3] = [
        LintRule::WithdrawalLabel,
        LintRule::Truncation,
        LintRule::EmptyReasons,
    ];

    pub fn id(self) -> &'static str {
        match self {
            LintRule::WithdrawalLabel => "L1",
            LintRule::Truncation => "L2",
            LintRule::EmptyReasons => "L3",
        }
    }
}

impl fmt::Display for LintRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LintFinding {
    pub rule_id: LintRule,
    pub severity: Severity,
    pub section: Aspect,
    pub message: String,
}

static WITHDRAW: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"(?i)\bwithdr[ae]w").unwrap());
static SIMILARLY_ORGANISED: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"(?i)\bsimilarly\s+organi[sz]ed\b").unwrap());

/// Runs every rule; findings come out in rule order, then section order.
pub fn lint_record(record: &ExtractionRecord) -> Vec<LintFinding> {
    let mut findings = Vec::new();

    if record.outcome_label == OutcomeLabel::Other
        && [&record.facts, &record.general_outcome, &record.reasons]
            .iter()
            .any(|s| WITHDRAW.is_match(s))
    {
        findings.push(LintFinding {
            rule_id: LintRule::WithdrawalLabel,
            severity: Severity::Warning,
            section: Aspect::OutcomeLabel,
            message: "withdrawn claims are labelled 'claimant loses' in the reference convention"
                .into(),
        });
    }

    for aspect in Aspect::ALL {
        if SIMILARLY_ORGANISED.is_match(record.section(aspect)) {
            findings.push(LintFinding {
                rule_id: LintRule::Truncation,
                severity: Severity::Error,
                section: aspect,
                message: "per-party outcomes truncated".into(),
            });
        }
    }

    if !record.absence_flags.get(Aspect::Reasons)
        && !record.reasons.chars().any(char::is_alphabetic)
    {
        findings.push(LintFinding {
            rule_id: LintRule::EmptyReasons,
            severity: Severity::Warning,
            section: Aspect::Reasons,
            message: "reasons section has no content and no absence statement".into(),
        });
    }

    findings
}
