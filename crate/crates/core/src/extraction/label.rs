use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ExtractionError;

/// Closed four-way outcome taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OutcomeLabel {
    #[serde(rename = "claimant wins")]
    ClaimantWins,
    #[serde(rename = "claimant partly wins")]
    ClaimantPartlyWins,
    #[serde(rename = "claimant loses")]
    ClaimantLoses,
    #[serde(rename = "other")]
    Other,
}

impl OutcomeLabel {
    pub const ALL: [OutcomeLabel; 4] = [
        OutcomeLabel::ClaimantWins,
        OutcomeLabel::ClaimantPartlyWins,
        OutcomeLabel::ClaimantLoses,
        OutcomeLabel::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            OutcomeLabel::ClaimantWins => "claimant wins",
            OutcomeLabel::ClaimantPartlyWins => "claimant partly wins",
            OutcomeLabel::ClaimantLoses => "claimant loses",
            OutcomeLabel::Other => "other",
        }
    }
}

impl fmt::Display for OutcomeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OutcomeLabel {
    type Err = ExtractionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        normalize_label(s)
    }
}

const WRAPPERS: &[char] = &[
    '\'', '"', '\u{2018}', '\u{2019}', '\u{201C}', '\u{201D}', '`', '*', '_',
];
const TRAILING: &[char] = &['.', ',', ';', ':', '!'];

fn strip_decoration(raw: &str) -> &str {
    let mut s = raw.trim();
    loop {
        let next = s
            .trim_start_matches(WRAPPERS)
            .trim_end_matches(WRAPPERS)
            .trim_end_matches(TRAILING)
            .trim();
        if next.len() == s.len() {
            return s;
        }
        s = next;
    }
}

fn canonical(text: &str) -> Option<OutcomeLabel> {
    match text {
        "claimant wins" => Some(OutcomeLabel::ClaimantWins),
        "claimant partly wins" | "claimant partially wins" => {
            Some(OutcomeLabel::ClaimantPartlyWins)
        }
        "claimant loses" => Some(OutcomeLabel::ClaimantLoses),
        "other" => Some(OutcomeLabel::Other),
        _ => None,
    }
}

/// Maps a label as written by the model onto the closed taxonomy.
///
/// Matching ignores case, surrounding quotes, bold markers and trailing
/// punctuation; "claimant partially wins" is accepted for the partial label.
pub fn normalize_label(raw: &str) -> Result<OutcomeLabel, ExtractionError> {
    let cleaned = strip_decoration(raw)
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase();
    canonical(&cleaned).ok_or_else(|| ExtractionError::UnparseableLabel(raw.trim().to_string()))
}

/// Finds the label inside a longer section body, e.g. `The claimant wins.`
/// Succeeds only when exactly one distinct label is mentioned.
pub(super) fn find_label_in(body: &str) -> Result<OutcomeLabel, ExtractionError> {
    if let Ok(label) = normalize_label(body) {
        return Ok(label);
    }
    let lower = body
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase();
    let probes: [(&str, OutcomeLabel); 8] = [
        ("claimant partly wins", OutcomeLabel::ClaimantPartlyWins),
        ("claimant partially wins", OutcomeLabel::ClaimantPartlyWins),
        ("claimant wins", OutcomeLabel::ClaimantWins),
        ("claimant loses", OutcomeLabel::ClaimantLoses),
        ("'other'", OutcomeLabel::Other),
        ("\"other\"", OutcomeLabel::Other),
        ("\u{2018}other\u{2019}", OutcomeLabel::Other),
        ("\u{201C}other\u{201D}", OutcomeLabel::Other),
    ];
    let mut found: Vec<OutcomeLabel> = probes
        .iter()
        .filter(|(needle, _)| lower.contains(needle))
        .map(|&(_, label)| label)
        .collect();
    found.sort();
    found.dedup();
    match found.as_slice() {
        [one] => Ok(*one),
        _ => Err(ExtractionError::UnparseableLabel(body.trim().to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn published_variants() {
        assert_eq!(
            normalize_label("'Claimant partly wins'.").unwrap(),
            OutcomeLabel::ClaimantPartlyWins
        );
        assert_eq!(
            normalize_label("Claimant partly wins.").unwrap(),
            OutcomeLabel::ClaimantPartlyWins
        );
        assert_eq!(
            normalize_label("\u{201C}Claimant wins\u{201D}.").unwrap(),
            OutcomeLabel::ClaimantWins
        );
        assert_eq!(normalize_label("**Other**").unwrap(), OutcomeLabel::Other);
    }

    #[test]
    fn partially_is_a_synonym() {
        assert_eq!(
            normalize_label("Claimant partially wins").unwrap(),
            OutcomeLabel::ClaimantPartlyWins
        );
    }

    #[test]
    fn outside_the_closed_set() {
        assert!(matches!(
            normalize_label("defendant wins"),
            Err(ExtractionError::UnparseableLabel(_))
        ));
        assert!(normalize_label("").is_err());
    }

    #[test]
    fn serde_uses_exact_strings() {
        for l in OutcomeLabel::ALL {
            assert_eq!(
                serde_json::to_string(&l).unwrap(),
                format!("\"{}\"", l.as_str())
            );
        }
    }

    #[test]
    fn label_inside_prose() {
        assert_eq!(
            find_label_in("The claimant wins.").unwrap(),
            OutcomeLabel::ClaimantWins
        );
        assert_eq!(
            find_label_in("Label: 'other' as the claim was stayed.").unwrap(),
            OutcomeLabel::Other
        );
        assert!(find_label_in("Claimant 1: claimant wins; claimant 2: claimant loses").is_err());
        assert!(find_label_in("other court decisions").is_err());
    }
}
