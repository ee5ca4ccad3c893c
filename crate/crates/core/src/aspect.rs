use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// One of the eight extracted sections, in prompt order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aspect {
    Facts,
    Claims,
    StatuteRefs,
    PrecedentRefs,
    GeneralOutcome,
    OutcomeLabel,
    OrderRemedies,
    Reasons,
}

impl Aspect {
    pub const ALL: [Aspect; 8] = [
        Aspect::Facts,
        Aspect::Claims,
        Aspect::StatuteRefs,
        Aspect::PrecedentRefs,
        Aspect::GeneralOutcome,
        Aspect::OutcomeLabel,
        Aspect::OrderRemedies,
        Aspect::Reasons,
    ];

    /// 1-based position in the prompt.
    pub fn number(self) -> usize {
        self as usize + 1
    }

    pub fn key(self) -> &'static str {
        match self {
            Aspect::Facts => "facts",
            Aspect::Claims => "claims",
            Aspect::StatuteRefs => "statute_refs",
            Aspect::PrecedentRefs => "precedent_refs",
            Aspect::GeneralOutcome => "general_outcome",
            Aspect::OutcomeLabel => "outcome_label",
            Aspect::OrderRemedies => "order_remedies",
            Aspect::Reasons => "reasons",
        }
    }

    /// Heading used when rendering a record back to response text.
    pub fn heading(self) -> &'static str {
        match self {
            Aspect::Facts => "Facts of the case",
            Aspect::Claims => "Claims made",
            Aspect::StatuteRefs => "References to legal statutes",
            Aspect::PrecedentRefs => "References to precedents",
            Aspect::GeneralOutcome => "General case outcome",
            Aspect::OutcomeLabel => "General case outcome summarised",
            Aspect::OrderRemedies => "Detailed order and remedies",
            Aspect::Reasons => "Essential reasons for the decision",
        }
    }

    /// Row label used in accuracy tables.
    pub fn table_label(self) -> &'static str {
        match self {
            Aspect::Facts => "facts",
            Aspect::Claims => "claims",
            Aspect::StatuteRefs => "references to legal statutes",
            Aspect::PrecedentRefs => "references to precedents",
            Aspect::GeneralOutcome => "general outcomes",
            Aspect::OutcomeLabel => "general outcomes in one of four labels",
            Aspect::OrderRemedies => "detailed outcomes",
            Aspect::Reasons => "reasons",
        }
    }
}

impl fmt::Display for Aspect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl FromStr for Aspect {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Aspect::ALL
            .into_iter()
            .find(|a| a.key() == s)
            .ok_or_else(|| format!("unknown aspect {s:?}"))
    }
}
