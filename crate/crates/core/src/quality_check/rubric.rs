//! Annotator guidance shown next to each score toggle. Documentation only; no
//! scoring logic reads it.

use serde::Serialize;

use crate::aspect::Aspect;
use crate::extraction::OutcomeLabel;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RubricEntry {
    pub id: &'static str,
    pub part: u8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub aspect: Option<Aspect>,
    pub title: &'static str,
    pub guidance: Vec<&'static str>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LabelConvention {
    pub situation: &'static str,
    pub label: OutcomeLabel,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Rubric {
    pub entries: Vec<RubricEntry>,
    pub label_conventions: Vec<LabelConvention>,
}

/// Stable id of the note on how an absent claims section must be written.
pub const CLAIMS_ABSENCE_NOTE: &str = "claims-absence";

impl Rubric {
    pub fn entries_for(&self, aspect: Aspect) -> impl Iterator<Item = &RubricEntry> {
        self.entries
            .iter()
            .filter(move |e| e.aspect == Some(aspect))
    }

    pub fn entry(&self, id: &str) -> Option<&RubricEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    /// Plain-text rendering, one block per entry.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&format!("[part {}] {}\n", e.part, e.title));
            for g in &e.guidance {
                out.push_str(&format!("  - {g}\n"));
            }
            out.push('\n');
        }
        out.push_str("Label conventions\n");
        for c in &self.label_conventions {
            out.push_str(&format!("  - {} => {}\n", c.situation, c.label));
        }
        out
    }
}

pub fn builtin() -> Rubric {
    let entries = vec![
        RubricEntry {
            id: "facts",
            part: 1,
            aspect: Some(Aspect::Facts),
            title: "Facts",
            guidance: vec![
                "Score 1 when the workplace events or the procedural history are described correctly. Either kind is acceptable.",
                "Score 0 when a stated fact is wrong, or when the events the judge relied on are left out.",
                "Identity of the parties and venue details are fine if correct.",
                "If the judgment summarises no facts, an explicit statement that none are given scores 1.",
                "For a decision resting on procedure, leaving procedural events out of this section is acceptable.",
            ],
        },
        RubricEntry {
            id: "claims",
            part: 1,
            aspect: Some(Aspect::Claims),
            title: "Claims",
            guidance: vec![
                "Score 1 when every claim the judge considered is identified.",
                "If the judgment really gives no claims, an explicit absence statement scores 1.",
            ],
        },
        RubricEntry {
            id: CLAIMS_ABSENCE_NOTE,
            part: 1,
            aspect: Some(Aspect::Claims),
            title: "Claims: absence must be explicit",
            guidance: vec![
                "When the judgment does not state the claims, the output has to say so plainly.",
                "Mentioning \"a claim\" without saying what it was scores 0, because it implies an identified claim exists.",
                "Saying the claim details are not in the file scores 0 whenever the judge did describe the claim.",
            ],
        },
        RubricEntry {
            id: "statutes",
            part: 1,
            aspect: Some(Aspect::StatuteRefs),
            title: "References to legal statutes",
            guidance: vec![
                "Score 1 only if every statute, regulation and rule cited is listed, procedural tribunal rules included.",
                "Any imprecision or omission scores 0.",
            ],
        },
        RubricEntry {
            id: "precedents",
            part: 1,
            aspect: Some(Aspect::PrecedentRefs),
            title: "References to precedents",
            guidance: vec![
                "Score 1 only if every cited decision is listed and none is invented.",
                "An explicit statement that no decisions are cited is correct when the judgment cites none.",
            ],
        },
        RubricEntry {
            id: "general-outcome",
            part: 1,
            aspect: Some(Aspect::GeneralOutcome),
            title: "General outcome",
            guidance: vec![
                "Must be accurate and complete. With several claims, each claim needs its own outcome.",
                "May complement the order section, e.g. a declaration described here and no remedy listed there.",
            ],
        },
        RubricEntry {
            id: "outcome-label",
            part: 1,
            aspect: Some(Aspect::OutcomeLabel),
            title: "Outcome label",
            guidance: vec![
                "One of: claimant wins, claimant partly wins, claimant loses, other.",
                "'other' is for results that cannot be determined or are not a win or a loss.",
                "Follow the label conventions below; a label that departs from them scores 0.",
            ],
        },
        RubricEntry {
            id: "order-remedies",
            part: 1,
            aspect: Some(Aspect::OrderRemedies),
            title: "Detailed order and remedies",
            guidance: vec![
                "Must be accurate and complete, including sums ordered and hearings vacated.",
            ],
        },
        RubricEntry {
            id: "reasons",
            part: 1,
            aspect: Some(Aspect::Reasons),
            title: "Reasons",
            guidance: vec![
                "Must name the facts that decided the outcome.",
                "Substantive decisions: the legal argument applied must be present too.",
                "Procedural decisions: the procedural ground must be present.",
            ],
        },
        RubricEntry {
            id: "suitable",
            part: 2,
            aspect: None,
            title: "Step 1: suitable for outcome prediction",
            guidance: vec![
                "Mark 1 only if facts, claims and the outcome label are all present and informative.",
                "An absence statement in facts or claims makes the case unsuitable here, even if it scored 1 in part 1.",
                "Sections holding only accessory details (parties, venue) are not informative.",
            ],
        },
        RubricEntry {
            id: "procedural",
            part: 2,
            aspect: None,
            title: "Step 2: dominated by procedure",
            guidance: vec![
                "Asked only for suitable cases.",
                "Mark 1 when the facts are only or mainly procedural events, or the reasons show a procedural ground decided it.",
                "Typical examples: withdrawal, non-compliance with an order.",
                "Mark 0 when the facts are mainly workplace events.",
            ],
        },
    ];

    let label_conventions = vec![
        LabelConvention {
            situation: "claims withdrawn",
            label: OutcomeLabel::ClaimantLoses,
        },
        LabelConvention {
            situation: "several claims, some won and some lost",
            label: OutcomeLabel::ClaimantPartlyWins,
        },
        LabelConvention {
            situation: "single money claim, award below the amount sought but the amount sought is not in the judgment",
            label: OutcomeLabel::ClaimantWins,
        },
        LabelConvention {
            situation: "claim and counterclaim both upheld",
            label: OutcomeLabel::ClaimantPartlyWins,
        },
        LabelConvention {
            situation: "respondent succeeds on its counterclaim",
            label: OutcomeLabel::ClaimantLoses,
        },
        LabelConvention {
            situation: "claimant wins with a reduction for contributory fault",
            label: OutcomeLabel::ClaimantPartlyWins,
        },
        LabelConvention {
            situation: "claim allowed to proceed to a final hearing",
            label: OutcomeLabel::Other,
        },
        LabelConvention {
            situation: "claims stayed for a settlement, or a correction judgment",
            label: OutcomeLabel::Other,
        },
    ];

    Rubric {
        entries,
        label_conventions,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_aspect_has_guidance() {
        let r = builtin();
        for a in Aspect::ALL {
            assert!(r.entries_for(a).next().is_some(), "{a}");
        }
    }

    #[test]
    fn claims_note_renders() {
        let r = builtin();
        let note = r.entry(CLAIMS_ABSENCE_NOTE).unwrap();
        assert_eq!(note.aspect, Some(Aspect::Claims));
        assert!(r.render_text().contains(note.title));
    }

    #[test]
    fn withdrawal_convention() {
        let r = builtin();
        let c = r
            .label_conventions
            .iter()
            .find(|c| c.situation.contains("withdrawn"))
            .unwrap();
        assert_eq!(c.label, OutcomeLabel::ClaimantLoses);
    }
}
