//! Acceptance run over the bundled fixture. Prints one PASS/FAIL line per
//! criterion and exits non-zero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use chrono::{TimeZone, Utc};
use num_bigint::BigUint;
use proptest::prelude::*;
use proptest::test_runner::{Config as RunnerConfig, TestCaseError, TestRunner};
use serde_json::Value;

use uket_core::config::Config;
use uket_core::corpus::{Corpus, SampleManifest};
use uket_core::dataset::{self, leakage_check, ExportPolicy};
use uket_core::extraction::{
    detect_absence, lint_record, normalize_label, parse_extraction, LintRule, OutcomeLabel,
};
use uket_core::llm_gateway::{Gateway, Mode, OfflineTransport, ReplayCache};
use uket_core::pipeline::{run_extract, ExtractJob};
use uket_core::prompting::PromptRegistry;
use uket_core::quality_check::rubric::{self, CLAIMS_ABSENCE_NOTE};
use uket_core::quality_check::{
    derive_eligibility, validate_annotation, EligibilityClass, QualityAnnotation,
};
use uket_core::stats::accuracy_ci;
use uket_core::Aspect;

const EXAMPLE_ONE: &str = include_str!("../../core/tests/data/example_one.txt");
const EXAMPLE_TWO: &str = include_str!("../../core/tests/data/example_two.txt");

/// Generated cases per property.
const CASES: u32 = 256;
/// Relative tolerance for the half-width oracle.
const ORACLE_RTOL: f64 = 1e-12;
/// Wall-clock budget for the accuracy table command.
const TABLE2_BUDGET: Duration = Duration::from_secs(1);

type Outcome = Result<(), String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/uket")
}

fn uket(args: &[&str]) -> Result<(String, Duration), String> {
    let started = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_uket"))
        .arg("--config")
        .arg(root().join("config.toml"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    let took = started.elapsed();
    if !out.status.success() {
        return Err(format!(
            "uket {args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok((String::from_utf8_lossy(&out.stdout).into_owned(), took))
}

fn uket_json(args: &[&str]) -> Result<Value, String> {
    let (out, _) = uket(args)?;
    serde_json::from_str(&out).map_err(|e| e.to_string())
}

fn table2() -> Outcome {
    let want = [
        ("facts", "0.942 ± 0.028", "0.919 ± 0.033"),
        ("claims", "0.981 ± 0.017", "0.976 ± 0.019"),
        ("statute_refs", "1.000", "1.000"),
        ("precedent_refs", "1.000", "1.000"),
        ("general_outcome", "0.996 ± 0.008", "0.992 ± 0.011"),
        ("outcome_label", "0.912 ± 0.034", "0.952 ± 0.026"),
        ("order_remedies", "0.996 ± 0.008", "0.992 ± 0.011"),
        ("reasons", "0.996 ± 0.008", "0.992 ± 0.011"),
    ];
    let (out, took) = uket(&["stats", "table2", "--json"])?;
    let table: Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let rows = table["rows"].as_array().ok_or("no rows")?;
    ensure!(rows.len() == want.len(), "{} rows", rows.len());
    for (row, (aspect, all, suitable)) in rows.iter().zip(want) {
        ensure!(
            row["aspect"] == aspect,
            "row {} out of order",
            row["aspect"]
        );
        ensure!(
            row["all_formatted"] == all,
            "{aspect} all: {}",
            row["all_formatted"]
        );
        ensure!(
            row["suitable_formatted"] == suitable,
            "{aspect} suitable: {}",
            row["suitable_formatted"]
        );
    }
    ensure!(took < TABLE2_BUDGET, "took {took:?}");
    Ok(())
}

/// Page counts straight from the corpus manifest, falling back to
/// characters over 3000 where the manifest has none.
fn scanned_pages() -> Result<BTreeMap<String, u64>, String> {
    let dir = root().join("corpus");
    let body = fs::read_to_string(dir.join("manifest.json")).map_err(|e| e.to_string())?;
    let manifest: BTreeMap<String, Value> =
        serde_json::from_str(&body).map_err(|e| e.to_string())?;
    let mut pages = BTreeMap::new();
    for (id, meta) in manifest {
        let n = match meta.get("page_count").and_then(Value::as_u64) {
            Some(p) => p,
            None => {
                let file = dir.join(format!("{}.txt", id.replace('/', "_")));
                let text = fs::read_to_string(file).map_err(|e| e.to_string())?;
                (text.chars().count() as u64).div_ceil(3000)
            }
        };
        pages.insert(id, n);
    }
    Ok(pages)
}

fn table1() -> Outcome {
    let want: [usize; 21] = [
        163, 43, 9, 6, 4, 3, 2, 2, 2, 2, 2, 2, 2, 1, 1, 1, 1, 1, 1, 1, 11,
    ];
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("sample.json");
    uket(&["sample", "--seed", "2024", "--out", out.to_str().unwrap()])?;
    let manifest = SampleManifest::load(&out).map_err(|e| e.to_string())?;
    let pages = scanned_pages()?;
    let mut got = [0usize; 21];
    for id in &manifest.case_ids {
        let p = *pages.get(id).ok_or(format!("{id} not in corpus"))?;
        got[(p.min(21) - 1) as usize] += 1;
    }
    ensure!(got == want, "per bucket {got:?}");
    ensure!(
        manifest.case_ids.len() == 260,
        "total {}",
        manifest.case_ids.len()
    );
    Ok(())
}

fn suitability() -> Outcome {
    let r = uket_json(&["stats", "suitability", "--json"])?;
    let got = (
        r["suitable"].as_u64(),
        r["percent"].as_str(),
        r["multipage_suitable"].as_u64(),
    );
    ensure!(got == (Some(124), Some("47.7%"), Some(85)), "{got:?}");
    Ok(())
}

fn rule21() -> Outcome {
    let r = uket_json(&["stats", "rule21", "--json"])?;
    let got = [
        r["total_cases"].as_u64(),
        r["facts_statutes_reasons"].as_u64(),
        r["statutes_only"].as_u64(),
        r["statutes_and_reasons_not_facts"].as_u64(),
    ];
    ensure!(got == [Some(26), Some(9), Some(10), Some(7)], "{got:?}");
    ensure!(
        r["other_patterns"].as_array().is_some_and(Vec::is_empty),
        "other patterns present"
    );
    Ok(())
}

fn published_golden() -> Outcome {
    let one = parse_extraction("3328920/2017", EXAMPLE_ONE).map_err(|e| e.to_string())?;
    ensure!(
        one.outcome_label == OutcomeLabel::ClaimantPartlyWins,
        "label {:?}",
        one.outcome_label
    );
    ensure!(
        one.statute_refs.contains("Rule 21 of Schedule 1"),
        "statutes: {}",
        one.statute_refs
    );
    let two = parse_extraction("2301070/2018", EXAMPLE_TWO).map_err(|e| e.to_string())?;
    ensure!(
        two.precedent_refs.contains("Agarwal v Cardiff University"),
        "precedents: {}",
        two.precedent_refs
    );
    for rec in [one, two] {
        let again =
            parse_extraction(&rec.case_id, &rec.to_response_text()).map_err(|e| e.to_string())?;
        ensure!(again == rec, "{} does not round-trip", rec.case_id);
    }
    Ok(())
}

fn review_lints() -> Outcome {
    let claims = "The claimant, Mr W Mollan, had made a claim against the respondents, Arrow XI Limited, but later withdrew it.";
    ensure!(
        !detect_absence(claims),
        "claims excerpt trips an absence marker"
    );
    let rubric = rubric::builtin();
    let note = rubric
        .entry(CLAIMS_ABSENCE_NOTE)
        .ok_or("claims note missing")?;
    let text = rubric.render_text();
    ensure!(text.contains(note.title), "note title not rendered");
    for line in &note.guidance {
        ensure!(text.contains(line), "guidance not rendered: {line}");
    }

    let withdrawn = EXAMPLE_TWO
        .replace(
            "5. General case outcome: The Tribunal struck out",
            "5. General case outcome: The claim was dismissed upon withdrawal. The Tribunal struck out",
        )
        .replace("'Claimant partly wins'.", "'Other'.");
    let rec = parse_extraction("w/1", &withdrawn).map_err(|e| e.to_string())?;
    let rules: Vec<LintRule> = lint_record(&rec).into_iter().map(|f| f.rule_id).collect();
    ensure!(
        rules == vec![LintRule::WithdrawalLabel],
        "withdrawal record gave {rules:?}"
    );

    let truncated = EXAMPLE_TWO.replace(
        "which led to detrimental treatment.",
        "which led to detrimental treatment. The information for the other claimants can be similarly organised.",
    );
    let rec = parse_extraction("t/1", &truncated).map_err(|e| e.to_string())?;
    let rules: Vec<LintRule> = lint_record(&rec).into_iter().map(|f| f.rule_id).collect();
    ensure!(
        rules == vec![LintRule::Truncation],
        "truncated record gave {rules:?}"
    );
    Ok(())
}

fn oracle_half_width(s: u64, n: u64) -> f64 {
    let scale = BigUint::from(10u32).pow(60);
    let num = BigUint::from(s) * BigUint::from(n - s) * scale;
    let root = (num / BigUint::from(n).pow(3)).sqrt() * BigUint::from(196u32);
    root.to_string().parse::<f64>().unwrap() / 1e32
}

fn runner() -> TestRunner {
    TestRunner::new(RunnerConfig {
        cases: CASES,
        failure_persistence: None,
        ..RunnerConfig::default()
    })
}

fn check<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Outcome {
    runner()
        .run(&strategy, test)
        .map_err(|e| format!("{name}: {e}"))
}

fn label_grid() -> Vec<(String, OutcomeLabel)> {
    let mut out = Vec::new();
    for label in OutcomeLabel::ALL {
        let lower = label.as_str().to_string();
        let title: Vec<String> = lower
            .split(' ')
            .map(|w| w[..1].to_uppercase() + &w[1..])
            .collect();
        for text in [lower.clone(), title.join(" "), lower.to_uppercase()] {
            for (open, close) in [("", ""), ("'", "'"), ("\"", "\""), ("\u{2018}", "\u{2019}")] {
                for dot in ["", "."] {
                    out.push((format!("{open}{text}{close}{dot}"), label));
                }
            }
        }
    }
    out
}

fn annotation(id: &str, suitable: u8, procedural: Option<u8>) -> QualityAnnotation {
    let at = Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap();
    QualityAnnotation::from_scores(id, [1; 8], suitable, procedural, "acceptance", at)
}

fn numbered(bodies: &[String; 8]) -> String {
    Aspect::ALL
        .iter()
        .zip(bodies)
        .map(|(a, b)| format!("{}. {}: {b}", a.number(), a.heading()))
        .collect::<Vec<_>>()
        .join("\n")
}

fn plain_record(
    id: &str,
    facts: &str,
    label: &str,
    reasons: &str,
) -> uket_core::extraction::ExtractionRecord {
    let mut bodies: [String; 8] = Default::default();
    for (i, b) in bodies.iter_mut().enumerate() {
        *b = format!("Section number {i} has its own wording here.");
    }
    bodies[0] = facts.to_string();
    bodies[5] = label.to_string();
    bodies[7] = reasons.to_string();
    parse_extraction(id, &numbered(&bodies)).unwrap()
}

fn properties() -> Outcome {
    check("oracle", (2u64..1_000_000, 0.0f64..1.0), |(n, frac)| {
        let s = 1 + ((n - 2) as f64 * frac) as u64;
        let got = accuracy_ci(s, n).unwrap().half_width;
        let want = oracle_half_width(s, n);
        prop_assert!(((got - want) / want).abs() < ORACLE_RTOL, "s={} n={}", s, n);
        Ok(())
    })?;

    check("symmetry", (2u64..100_000, 0.0f64..1.0), |(n, frac)| {
        let s = (n as f64 * frac) as u64;
        let a = accuracy_ci(s, n).unwrap().half_width;
        let b = accuracy_ci(n - s, n).unwrap().half_width;
        prop_assert_eq!(a.to_bits(), b.to_bits());
        Ok(())
    })?;

    check(
        "monotone in trials",
        (1u64..500, 1u64..500, 2u64..20),
        |(s, extra, k)| {
            let n = s + extra;
            prop_assert!(
                accuracy_ci(k * s, k * n).unwrap().half_width
                    < accuracy_ci(s, n).unwrap().half_width
            );
            Ok(())
        },
    )?;

    check(
        "monotone toward one half",
        (4u64..10_000, 0.0f64..1.0),
        |(n, frac)| {
            let s = 1 + ((n / 2 - 1) as f64 * frac) as u64;
            prop_assert!(s < n / 2 + n % 2);
            prop_assert!(
                accuracy_ci(s - 1, n).unwrap().half_width < accuracy_ci(s, n).unwrap().half_width
            );
            Ok(())
        },
    )?;

    let grid = label_grid();
    ensure!(grid.len() == 96, "grid has {} variants", grid.len());
    check(
        "label grid",
        (0..grid.len(), "[ \t]{0,2}", "[ \t]{0,2}"),
        |(i, l, r)| {
            let (raw, want) = &grid[i];
            prop_assert_eq!(normalize_label(&format!("{l}{raw}{r}")).unwrap(), *want);
            Ok(())
        },
    )?;

    check(
        "gating",
        (0u8..=2, prop::option::of(0u8..=2)),
        |(suitable, procedural)| {
            let a = annotation("g/1", suitable, procedural);
            let valid = suitable <= 1
                && procedural.is_none_or(|p| p <= 1)
                && (suitable == 1) == procedural.is_some();
            prop_assert_eq!(validate_annotation(&a).is_empty(), valid);
            match derive_eligibility(&a) {
                Ok(class) => {
                    prop_assert!(valid);
                    let want = match (suitable, procedural) {
                        (0, _) => EligibilityClass::NotPredictable,
                        (_, Some(1)) => EligibilityClass::ProceduralOnly,
                        _ => EligibilityClass::Substantive,
                    };
                    prop_assert_eq!(class, want);
                }
                Err(_) => prop_assert!(!valid),
            }
            Ok(())
        },
    )?;

    check(
        "policy containment",
        prop::collection::vec((0u8..=1, 0u8..=1), 1..30),
        |cases| {
            let mut records = Vec::new();
            let mut anns = Vec::new();
            for (i, (suitable, procedural)) in cases.iter().enumerate() {
                let id = format!("{i}/2020");
                anns.push(annotation(
                    &id,
                    *suitable,
                    (*suitable == 1).then_some(*procedural),
                ));
                records.push(plain_record(
                    &id,
                    "Facts stated here.",
                    "Claimant wins.",
                    "Reasons given.",
                ));
            }
            let ids = |p| -> Vec<String> {
                dataset::select(&records, &anns, p)
                    .examples
                    .into_iter()
                    .map(|e| e.case_id)
                    .collect()
            };
            let narrow = ids(ExportPolicy::SubstantiveOnly);
            let wide = ids(ExportPolicy::ProceduralInclusive);
            prop_assert!(narrow.iter().all(|id| wide.contains(id)));
            for a in &anns {
                if a.part2_suitable == 0 {
                    prop_assert!(!wide.contains(&a.case_id));
                }
            }
            Ok(())
        },
    )?;

    check(
        "leakage guard",
        (
            "[A-Z][a-z]{3,8}( [a-z]{2,9}){3,10}",
            "([A-Z][a-z]{2,8}( [a-z]{2,9}){2,5}\\. ){0,2}",
        ),
        |(sentence, before)| {
            prop_assume!(sentence.chars().count() >= 25);
            let rec = plain_record(
                "k/1",
                &format!("{before}{sentence}."),
                "Claimant wins.",
                &format!("{sentence}."),
            );
            let offending = leakage_check(&rec).unwrap_err();
            prop_assert!(offending.contains(&sentence));
            Ok(())
        },
    )?;
    Ok(())
}

fn read_tree(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    for entry in fs::read_dir(dir).map_err(|e| format!("{}: {e}", dir.display()))? {
        let path = entry.map_err(|e| e.to_string())?.path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        files.insert(name, fs::read(&path).map_err(|e| e.to_string())?);
    }
    Ok(files)
}

fn replay() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut runs = Vec::new();
    for run in ["a", "b"] {
        let records = tmp.path().join(run).join("records");
        let responses = tmp.path().join(run).join("responses");
        let report = uket_json(&[
            "extract",
            "--mode",
            "replay-strict",
            "--records",
            records.to_str().unwrap(),
            "--responses",
            responses.to_str().unwrap(),
        ])?;
        ensure!(
            report["spend"]["live_requests"] == 0,
            "live requests: {}",
            report["spend"]["live_requests"]
        );
        ensure!(report["parsed"] == 260, "parsed {}", report["parsed"]);
        runs.push(read_tree(&records)?);
    }
    ensure!(runs[0] == runs[1], "record files differ between runs");
    ensure!(
        runs[0] == read_tree(&root().join("records"))?,
        "records differ from the bundled set"
    );

    let cfg = Config::load(&root().join("config.toml")).map_err(|e| e.to_string())?;
    let corpus = Corpus::load_dir(&cfg.resolve(&cfg.paths.corpus)).map_err(|e| e.to_string())?;
    let sample =
        SampleManifest::load(&cfg.resolve(&cfg.paths.sample)).map_err(|e| e.to_string())?;
    let cache = ReplayCache::open(cfg.resolve(&cfg.paths.cache)).map_err(|e| e.to_string())?;
    let transport = Arc::new(OfflineTransport::default());
    let gateway = Gateway::new(cfg.gateway_with_env(), transport.clone(), Some(cache));
    let job = ExtractJob {
        corpus: &corpus,
        case_ids: &sample.case_ids,
        registry: &PromptRegistry::builtin(),
        template: cfg.template().map_err(|e| e.to_string())?,
        model: cfg.model.clone(),
        markers: cfg.extraction.absence_markers.clone(),
        mode: Mode::ReplayStrict,
        responses_dir: tmp.path().join("c/responses"),
        records_dir: tmp.path().join("c/records"),
        threads: 4,
    };
    let report = run_extract(&job, &gateway).map_err(|e| e.to_string())?;
    ensure!(
        report.failures.is_empty(),
        "{} failures",
        report.failures.len()
    );
    ensure!(
        transport.contacts() == 0,
        "transport contacted {} times",
        transport.contacts()
    );
    ensure!(
        read_tree(&tmp.path().join("c/records"))? == runs[0],
        "in-process records differ"
    );
    Ok(())
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("accuracy table reproduces all sixteen cells", table2),
        ("seeded sample matches the stratum plan", table1),
        ("suitability counts", suitability),
        ("rule 21 report", rule21),
        ("published responses parse and round-trip", published_golden),
        ("review conventions and lints", review_lints),
        ("property suites", properties),
        ("strict replay is byte-identical and offline", replay),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(()) => println!("PASS  {name}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} criteria failed");
        std::process::exit(1);
    }
}
