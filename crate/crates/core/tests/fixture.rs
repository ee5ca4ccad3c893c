//! Checks over the bundled fixture in `fixtures/uket`.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use uket_core::config::Config;
use uket_core::corpus::{
    sample, stratify, Bucket, CaseDocument, CaseMeta, Corpus, SampleManifest, SamplePlan,
};
use uket_core::dataset::{self, leakage_check, ExportPolicy};
use uket_core::extraction::{
    lint_record, load_records, parse_extraction, ExtractionRecord, OutcomeLabel,
};
use uket_core::quality_check::{AnnotationStore, QualityAnnotation};
use uket_core::stats::{self, IntervalMethod, Rule21Detector, DEFAULT_RULE21_PHRASES};
use uket_core::Aspect;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/uket")
}

fn records() -> Vec<ExtractionRecord> {
    load_records(&root().join("records")).unwrap()
}

fn annotations() -> Vec<QualityAnnotation> {
    AnnotationStore::open(root().join("annotations"))
        .unwrap()
        .load_all()
        .unwrap()
        .into_iter()
        .map(|s| s.annotation)
        .collect()
}

fn record(id: &str) -> ExtractionRecord {
    records().into_iter().find(|r| r.case_id == id).unwrap()
}

/// Page counts read straight from the manifest and transcript files.
fn scanned_pages() -> BTreeMap<String, u64> {
    let dir = root().join("corpus");
    let manifest: BTreeMap<String, Value> =
        serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    manifest
        .into_iter()
        .map(|(id, meta)| {
            let pages = match meta.get("page_count").and_then(Value::as_u64) {
                Some(p) => p,
                None => {
                    let text =
                        fs::read_to_string(dir.join(format!("{}.txt", id.replace('/', "_"))))
                            .unwrap();
                    (text.chars().count() as u64).div_ceil(3000)
                }
            };
            (id, pages)
        })
        .collect()
}

#[test]
fn bucket_sizes_match_an_independent_scan() {
    let mut tally: BTreeMap<String, usize> = BTreeMap::new();
    for pages in scanned_pages().values() {
        let key = if *pages > 20 {
            ">20".to_string()
        } else {
            pages.to_string()
        };
        *tally.entry(key).or_default() += 1;
    }
    let corpus = Corpus::load_dir(&root().join("corpus")).unwrap();
    assert_eq!(corpus.len(), 300);
    for (bucket, ids) in stratify(corpus.docs()).unwrap() {
        assert_eq!(
            ids.len(),
            tally.get(&bucket.to_string()).copied().unwrap_or(0),
            "{bucket}"
        );
    }
}

#[test]
fn long_published_transcript_page_count_follows_character_count() {
    let path = root().join("corpus/2301070_2018.txt");
    let text = fs::read_to_string(&path).unwrap();
    let chars = text.chars().count();
    let expected = chars.div_ceil(3000) as u32;
    let corpus = Corpus::load_dir(&root().join("corpus")).unwrap();
    let doc = corpus.get("2301070/2018").unwrap();
    assert!(doc.meta.page_count.is_none());
    assert_eq!(doc.page_count, expected);
    assert_eq!(expected, 4);
}

#[test]
fn seeded_sample_matches_the_stratum_plan() {
    let corpus = Corpus::load_dir(&root().join("corpus")).unwrap();
    let stored = SampleManifest::load(&root().join("sample.json")).unwrap();
    let m = sample(corpus.docs(), &SamplePlan::table1(), stored.seed).unwrap();
    assert_eq!(m, stored);
    let want = [
        163, 43, 9, 6, 4, 3, 2, 2, 2, 2, 2, 2, 2, 1, 1, 1, 1, 1, 1, 1, 11,
    ];
    let got: Vec<usize> = Bucket::all().map(|b| m.drawn_per_bucket[&b]).collect();
    assert_eq!(got, want);
    assert_eq!(m.case_ids.len(), 260);
    assert!(m.shortfalls.is_empty());
}

#[test]
fn within_bucket_draws_are_uniform() {
    let docs: Vec<CaseDocument> = (0..10)
        .map(|i| {
            CaseDocument::new(
                format!("{i}/2020"),
                "t",
                CaseMeta {
                    page_count: Some(3),
                    ..Default::default()
                },
            )
            .unwrap()
        })
        .collect();
    let mut plan = SamplePlan::table1();
    for s in &mut plan.strata {
        s.target = if s.bucket == Bucket::Pages(3) { 3 } else { 0 };
    }
    let mut counts: BTreeMap<String, f64> = BTreeMap::new();
    let draws = 10_000;
    for seed in 0..draws {
        for id in sample(&docs, &plan, seed).unwrap().case_ids {
            *counts.entry(id).or_default() += 1.0;
        }
    }
    let expected = draws as f64 * 3.0 / 10.0;
    let chi2: f64 = counts
        .values()
        .map(|o| (o - expected).powi(2) / expected)
        .sum();
    // Upper 1% point of chi-square with 9 degrees of freedom.
    assert!(chi2 < 21.665994, "chi2 = {chi2}");
}

#[test]
fn every_fixture_response_round_trips_and_keeps_its_text() {
    let dir = root().join("responses");
    let index: BTreeMap<String, String> =
        serde_json::from_str(&fs::read_to_string(dir.join("index.json")).unwrap()).unwrap();
    assert_eq!(index.len(), 260);
    let squash = |s: &str| s.chars().filter(|c| !c.is_whitespace()).collect::<String>();
    for (stem, id) in index {
        let raw = fs::read_to_string(dir.join(format!("{stem}.txt"))).unwrap();
        let rec = parse_extraction(&id, &raw).unwrap();
        assert!(raw.contains(&rec.outcome_label_raw), "{id}");
        let flat = squash(&raw);
        for a in Aspect::ALL {
            assert!(flat.contains(&squash(rec.section(a))), "{id} {a}");
        }
        assert_eq!(
            parse_extraction(&id, &rec.to_response_text()).unwrap(),
            rec,
            "{id}"
        );
        assert_eq!(rec, record(&id));
    }
}

#[test]
fn example_one_record_lints_clean() {
    let rec = record("3328920/2017");
    assert_eq!(rec.outcome_label, OutcomeLabel::ClaimantPartlyWins);
    assert!(lint_record(&rec).is_empty());
}

#[test]
fn example_one_repeats_a_sentence_across_facts_and_reasons() {
    let offending = leakage_check(&record("3328920/2017")).unwrap_err();
    assert_eq!(
        offending,
        vec!["The Respondent failed to present a response to the claim".to_string()]
    );
    let a = annotations()
        .into_iter()
        .find(|a| a.case_id == "3328920/2017")
        .unwrap();
    assert!(!a.is_suitable());
}

#[test]
fn lint_counts_over_the_fixture() {
    let mut l1 = 0;
    let mut l2 = Vec::new();
    for rec in records() {
        for f in lint_record(&rec) {
            match f.rule_id.id() {
                "L1" => {
                    assert_eq!(rec.outcome_label, OutcomeLabel::Other);
                    l1 += 1;
                }
                "L2" => l2.push(rec.case_id.clone()),
                other => panic!("unexpected {other} on {}", rec.case_id),
            }
        }
    }
    assert_eq!(l1, 16);
    l2.dedup();
    assert_eq!(l2.len(), 1);
}

#[test]
fn accuracy_table_matches_published_cells() {
    let want = [
        ("0.942 ± 0.028", "0.919 ± 0.033"),
        ("0.981 ± 0.017", "0.976 ± 0.019"),
        ("1.000", "1.000"),
        ("1.000", "1.000"),
        ("0.996 ± 0.008", "0.992 ± 0.011"),
        ("0.912 ± 0.034", "0.952 ± 0.026"),
        ("0.996 ± 0.008", "0.992 ± 0.011"),
        ("0.996 ± 0.008", "0.992 ± 0.011"),
    ];
    let table =
        stats::accuracy_table(&annotations(), &records(), IntervalMethod::SampleWide).unwrap();
    assert_eq!(table.all_trials, 260);
    assert_eq!(table.suitable_trials, Some(124));
    for (row, (all, suitable)) in table.rows.iter().zip(want) {
        assert_eq!(row.all_formatted, all, "{}", row.label);
        assert_eq!(
            row.suitable_formatted.as_deref(),
            Some(suitable),
            "{}",
            row.label
        );
    }
}

#[test]
fn plain_wald_differs_from_the_published_suitable_column() {
    let table = stats::accuracy_table(&annotations(), &records(), IntervalMethod::Wald).unwrap();
    assert_eq!(table.row(Aspect::Facts).all_formatted, "0.942 ± 0.028");
    assert_eq!(
        table.row(Aspect::Facts).suitable_formatted.as_deref(),
        Some("0.919 ± 0.048")
    );
}

#[test]
fn suitability_and_rule21_reports() {
    let corpus = Corpus::load_dir(&root().join("corpus")).unwrap();
    let s = stats::suitability_rate(&annotations(), &corpus.page_counts()).unwrap();
    assert_eq!(
        (s.suitable, s.percent.as_str(), s.multipage_suitable),
        (124, "47.7%", 85)
    );

    let detector = Rule21Detector::new(DEFAULT_RULE21_PHRASES).unwrap();
    let r = stats::rule21_report(&records(), &detector);
    assert_eq!(r.total_cases, 26);
    assert_eq!(
        (
            r.facts_statutes_reasons,
            r.statutes_only,
            r.statutes_and_reasons_not_facts
        ),
        (9, 10, 7)
    );
    assert!(r.other_patterns.is_empty());
}

#[test]
fn dataset_export_over_the_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let (recs, anns) = (records(), annotations());
    let wide = dataset::export(
        &recs,
        &anns,
        ExportPolicy::ProceduralInclusive,
        &dir.path().join("w.jsonl"),
    )
    .unwrap();
    assert_eq!(wide.exported, 124);
    assert!(wide.skipped.is_empty());
    let narrow = dataset::export(
        &recs,
        &anns,
        ExportPolicy::SubstantiveOnly,
        &dir.path().join("n.jsonl"),
    )
    .unwrap();
    assert_eq!(narrow.exported, 94);

    let again = dir.path().join("w2.jsonl");
    dataset::export(&recs, &anns, ExportPolicy::ProceduralInclusive, &again).unwrap();
    assert_eq!(
        fs::read(dir.path().join("w.jsonl")).unwrap(),
        fs::read(again).unwrap()
    );
}

#[test]
fn fixture_config_resolves_paths() {
    let cfg = Config::load(&root().join("config.toml")).unwrap();
    assert_eq!(cfg.resolve(&cfg.paths.records), root().join("records"));
    assert_eq!(cfg.stats.interval_method, IntervalMethod::SampleWide);
    assert_eq!(cfg.model.model_id, "gpt-4-32k");
}
