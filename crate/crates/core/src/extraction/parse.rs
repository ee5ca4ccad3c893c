//! Section segmentation of raw model responses.
//!
//! Two heading dialects are accepted, in any order:
//!
//! ```text
//! 1. Facts of the case: The claimant ...
//! - Facts of the case:** The claimant ...
//! ```
//!
//! A heading is a line whose label (text before the first colon, with list
//! markers and bold markers removed) starts with one of the aspect phrases below.
//! Phrases are tried longest first so "general case outcome summarised" is never
//! read as "general case outcome".

use std::sync::LazyLock;

use regex::Regex;

use super::ExtractionError;
use crate::aspect::Aspect;

const MAX_LABEL_CHARS: usize = 200;

/// Multi-word phrases matched as label prefixes.
const PREFIX_PHRASES: &[(&str, Aspect)] = &[
    ("the facts of the case", Aspect::Facts),
    ("facts of the case", Aspect::Facts),
    ("the claims made", Aspect::Claims),
    ("claims made", Aspect::Claims),
    ("any references to legal statutes", Aspect::StatuteRefs),
    ("references to legal statutes", Aspect::StatuteRefs),
    ("reference to legal statutes", Aspect::StatuteRefs),
    ("references to precedents", Aspect::PrecedentRefs),
    ("reference to precedents", Aspect::PrecedentRefs),
    ("general case outcome summarised", Aspect::OutcomeLabel),
    ("general case outcome summarized", Aspect::OutcomeLabel),
    ("general case outcome (summarised", Aspect::OutcomeLabel),
    ("general case outcome (summarized", Aspect::OutcomeLabel),
    ("general case outcome (labelled", Aspect::OutcomeLabel),
    ("general case outcome (labeled", Aspect::OutcomeLabel),
    ("general case outcome in one of", Aspect::OutcomeLabel),
    ("general case outcome label", Aspect::OutcomeLabel),
    ("general outcome summarised", Aspect::OutcomeLabel),
    ("general outcome summarized", Aspect::OutcomeLabel),
    ("general outcomes in one of", Aspect::OutcomeLabel),
    ("labelled outcome", Aspect::OutcomeLabel),
    ("labeled outcome", Aspect::OutcomeLabel),
    ("outcome label", Aspect::OutcomeLabel),
    ("general case outcome", Aspect::GeneralOutcome),
    ("general outcome", Aspect::GeneralOutcome),
    ("detailed order and remedies", Aspect::OrderRemedies),
    ("detailed order", Aspect::OrderRemedies),
    ("detailed outcome", Aspect::OrderRemedies),
    ("essential reasons", Aspect::Reasons),
    ("reasons for the decision", Aspect::Reasons),
];

/// Short labels accepted only when they make up the whole label.
const EXACT_LABELS: &[(&str, Aspect)] = &[
    ("facts", Aspect::Facts),
    ("claims", Aspect::Claims),
    ("legal statutes", Aspect::StatuteRefs),
    ("statutes", Aspect::StatuteRefs),
    ("precedents", Aspect::PrecedentRefs),
    ("outcome", Aspect::GeneralOutcome),
    ("order and remedies", Aspect::OrderRemedies),
    ("remedies", Aspect::OrderRemedies),
    ("reasons", Aspect::Reasons),
];

static MARKER: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^(?:[-*•]\s+|\d{1,2}[.)]\s*|#{1,6}\s+)?").unwrap());

static SORTED_PHRASES: LazyLock<Vec<(&'static str, Aspect)>> = LazyLock::new(|| {
    let mut v = PREFIX_PHRASES.to_vec();
    v.sort_by_key(|(p, _)| std::cmp::Reverse(p.len()));
    v
});

/// A matched heading: which aspect, where the line starts and where its body begins
/// (both byte offsets into the response).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Heading {
    pub aspect: Aspect,
    pub line_start: usize,
    pub body_start: usize,
}

fn classify(label: &str) -> Option<Aspect> {
    let cleaned: String = label
        .replace(['*', '_'], "")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_lowercase();
    if cleaned.is_empty() {
        return None;
    }
    if let Some(&(_, aspect)) = EXACT_LABELS.iter().find(|(l, _)| *l == cleaned) {
        return Some(aspect);
    }
    SORTED_PHRASES
        .iter()
        .find(|(p, _)| {
            cleaned.starts_with(p)
                && cleaned[p.len()..]
                    .chars()
                    .next()
                    .is_none_or(|c| !c.is_alphanumeric())
        })
        .map(|&(_, aspect)| aspect)
}

/// Tries to read `line` (without its terminator) as a heading. Returns the aspect
/// and the offset of the body within the line.
fn match_heading(line: &str) -> Option<(Aspect, usize)> {
    let indent = line.len() - line.trim_start().len();
    let rest = &line[indent..];
    let marker_len = MARKER.find(rest).map_or(0, |m| m.end());
    let after_marker = &rest[marker_len..];
    let colon = after_marker.find(':')?;
    let label = &after_marker[..colon];
    if label.chars().count() > MAX_LABEL_CHARS {
        return None;
    }
    let aspect = classify(label)?;

    let mut body = indent + marker_len + colon + 1;
    let tail = &line[body..];
    let skipped = tail.len() - tail.trim_start_matches(['*', '_']).len();
    body += skipped;
    let tail = &line[body..];
    body += tail.len() - tail.trim_start_matches([' ', '\t']).len();
    Some((aspect, body))
}

pub(crate) fn find_headings(raw: &str) -> Vec<Heading> {
    let mut out = Vec::new();
    let mut offset = 0;
    for line in raw.split_inclusive('\n') {
        let content = line.trim_end_matches(['\n', '\r']);
        if let Some((aspect, body)) = match_heading(content) {
            out.push(Heading {
                aspect,
                line_start: offset,
                body_start: offset + body,
            });
        }
        offset += line.len();
    }
    out
}

/// Splits a response into its eight section bodies, indexed by `Aspect as usize`.
pub(crate) fn split_sections(raw: &str) -> Result<[String; 8], ExtractionError> {
    let headings = find_headings(raw);
    let mut bodies: [Option<String>; 8] = Default::default();
    for (i, h) in headings.iter().enumerate() {
        let end = headings
            .get(i + 1)
            .map_or(raw.len(), |next| next.line_start);
        let slot = &mut bodies[h.aspect as usize];
        if slot.is_some() {
            return Err(ExtractionError::AmbiguousSection(h.aspect));
        }
        *slot = Some(raw[h.body_start..end].trim().to_string());
    }
    if let Some(missing) = Aspect::ALL
        .into_iter()
        .find(|a| bodies[*a as usize].is_none())
    {
        return Err(ExtractionError::MissingSection(missing));
    }
    Ok(bodies.map(|b| b.expect("checked above")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbered_dialect() {
        let (a, at) = match_heading("1. Facts of the case: The claimant").unwrap();
        assert_eq!(a, Aspect::Facts);
        assert_eq!(&"1. Facts of the case: The claimant"[at..], "The claimant");
    }

    #[test]
    fn bulleted_bold_dialect() {
        let line = "- Facts of the case:** The case involves";
        let (a, at) = match_heading(line).unwrap();
        assert_eq!(a, Aspect::Facts);
        assert_eq!(&line[at..], "The case involves");

        let line = "- **Essential reasons for the decision:** Because";
        let (a, at) = match_heading(line).unwrap();
        assert_eq!(a, Aspect::Reasons);
        assert_eq!(&line[at..], "Because");
    }

    #[test]
    fn label_heading_beats_outcome_heading() {
        let line = "6. General case outcome summarised using one of the following four labels: 'Claimant partly wins'.";
        assert_eq!(match_heading(line).unwrap().0, Aspect::OutcomeLabel);
        assert_eq!(
            match_heading("- General case outcome summarised:** Claimant partly wins.")
                .unwrap()
                .0,
            Aspect::OutcomeLabel
        );
        assert_eq!(
            match_heading("5. General case outcome: The Tribunal struck out")
                .unwrap()
                .0,
            Aspect::GeneralOutcome
        );
    }

    #[test]
    fn reasons_with_parenthetical() {
        let line = "8. Essential reasons for the decision (procedural and substantive): The court";
        assert_eq!(match_heading(line).unwrap().0, Aspect::Reasons);
    }

    #[test]
    fn body_bullets_are_not_headings() {
        assert!(match_heading("- Unlawful deduction from wages (£1627.50)").is_none());
        assert!(match_heading("- Claims for holiday pay: dismissed").is_none());
        assert!(match_heading("The claimant's claims: all dismissed").is_none());
        assert!(match_heading("Factsheet: x").is_none());
    }

    #[test]
    fn duplicate_heading_is_ambiguous() {
        let raw = "1. Facts of the case: a\n1. Facts of the case: b\n";
        assert!(matches!(
            split_sections(raw),
            Err(ExtractionError::AmbiguousSection(Aspect::Facts))
        ));
    }
}
