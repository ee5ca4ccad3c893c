use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use chrono::{TimeZone, Utc};
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use uket_core::corpus::{CaseDocument, CaseMeta, Corpus};
use uket_core::extraction::parse_extraction;
use uket_core::quality_check::{AnnotationStore, QualityAnnotation};
use uket_service::{router, AppState};

fn response(facts: &str, general: &str, label: &str) -> String {
    format!(
        "1. Facts of the case: {facts}\n\
         2. Claims made: Unlawful deduction from wages.\n\
         3. References to legal statutes: Employment Rights Act 1996, section 13.\n\
         4. References to precedents: There are no references to precedents.\n\
         5. General case outcome: {general}\n\
         6. General case outcome summarised: {label}\n\
         7. Detailed order and remedies: No order.\n\
         8. Essential reasons for the decision: The claimant chose to end the claim."
    )
}

fn app(dir: &std::path::Path) -> (Router, AppState) {
    let ids = ["1/2020", "2/2020", "3/2020"];
    let docs = ids
        .iter()
        .map(|id| {
            CaseDocument::new(*id, format!("Judgment in {id}."), CaseMeta::default()).unwrap()
        })
        .collect();
    let corpus = Corpus::new(docs).unwrap();
    let records = vec![
        parse_extraction(
            "1/2020",
            &response(
                "The claimant was a driver.",
                "The claim succeeded.",
                "Claimant wins",
            ),
        )
        .unwrap(),
        parse_extraction(
            "2/2020",
            &response(
                "The claimant withdrew the claim.",
                "Dismissed upon withdrawal.",
                "Other",
            ),
        )
        .unwrap(),
    ];
    let store = AnnotationStore::open(dir.join("annotations")).unwrap();
    let state = AppState::new(
        corpus,
        ids.iter().map(|s| s.to_string()).collect(),
        records,
        store,
    )
    .unwrap();
    (router(state.clone()), state)
}

fn annotation(id: &str, suitable: u8, procedural: Option<u8>) -> QualityAnnotation {
    let at = Utc.with_ymd_and_hms(2024, 5, 1, 9, 0, 0).unwrap();
    QualityAnnotation::from_scores(id, [1; 8], suitable, procedural, "ann-1", at)
}

async fn call(app: &Router, method: &str, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
    let mut req = Request::builder().method(method).uri(uri);
    let body = match body {
        Some(v) => {
            req = req.header("content-type", "application/json");
            Body::from(v.to_string())
        }
        None => Body::empty(),
    };
    let resp = app.clone().oneshot(req.body(body).unwrap()).await.unwrap();
    let status = resp.status();
    let bytes = resp.into_body().collect().await.unwrap().to_bytes();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes)
            .unwrap_or(Value::String(String::from_utf8_lossy(&bytes).into()))
    };
    (status, value)
}

fn put_body(a: &QualityAnnotation, expected: u64) -> Value {
    json!({ "annotation": a, "expected_version": expected })
}

#[tokio::test]
async fn pending_and_all_lists() {
    let dir = tempfile::tempdir().unwrap();
    let (app, state) = app(dir.path());
    state
        .store()
        .store(&annotation("1/2020", 1, Some(0)), 0)
        .unwrap();

    let (s, v) = call(&app, "GET", "/api/cases?status=pending", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["total"], 2);
    assert_eq!(v["items"].as_array().unwrap().len(), 2);

    let (_, v) = call(&app, "GET", "/api/cases?status=all", None).await;
    assert_eq!(v["total"], 3);
    assert_eq!(v["items"][0]["status"], "done");
    assert_eq!(v["items"][0]["label"], "claimant wins");

    let (_, v) = call(
        &app,
        "GET",
        "/api/cases?status=all&page=1&page_size=2",
        None,
    )
    .await;
    assert_eq!(v["items"].as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn empty_sample_gives_empty_page() {
    let dir = tempfile::tempdir().unwrap();
    let state = AppState::new(
        Corpus::default(),
        Vec::new(),
        Vec::new(),
        AnnotationStore::open(dir.path()).unwrap(),
    )
    .unwrap();
    let (s, v) = call(&router(state), "GET", "/api/cases?status=pending", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["total"], 0);
    assert!(v["items"].as_array().unwrap().is_empty());
}

#[tokio::test]
async fn case_view_and_404() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path());
    let (s, v) = call(&app, "GET", "/api/cases/1%2F2020", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["record"]["facts"], "The claimant was a driver.");
    for key in [
        "facts",
        "claims",
        "statute_refs",
        "precedent_refs",
        "general_outcome",
        "outcome_label_raw",
        "order_remedies",
        "reasons",
    ] {
        assert!(!v["record"][key].as_str().unwrap().is_empty(), "{key}");
    }
    assert_eq!(v["version"], 0);
    assert!(v["lint_findings"].as_array().unwrap().is_empty());

    let (s, _) = call(&app, "GET", "/api/cases/9%2F9999", None).await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn withdrawal_case_shows_l1() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path());
    let (_, v) = call(&app, "GET", "/api/cases/2%2F2020", None).await;
    let findings = v["lint_findings"].as_array().unwrap();
    assert_eq!(findings.len(), 1);
    assert_eq!(findings[0]["rule_id"], "L1");
}

#[tokio::test]
async fn put_versions_conflicts_and_gating() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path());
    let a = annotation("3/2020", 1, Some(0));

    let (s, v) = call(
        &app,
        "PUT",
        "/api/cases/3%2F2020/annotation",
        Some(put_body(&a, 0)),
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["version"], 1);

    let (s, v) = call(&app, "GET", "/api/cases/3%2F2020", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["version"], 1);
    assert_eq!(v["status"], "done");
    assert_eq!(
        serde_json::from_value::<QualityAnnotation>(v["annotation"].clone()).unwrap(),
        a
    );

    let (s, v) = call(
        &app,
        "PUT",
        "/api/cases/3%2F2020/annotation",
        Some(put_body(&a, 0)),
    )
    .await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(v["current_version"], 1);

    let (s, v) = call(
        &app,
        "PUT",
        "/api/cases/3%2F2020/annotation",
        Some(put_body(&a, 1)),
    )
    .await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["version"], 2);

    let gated = annotation("3/2020", 0, Some(1));
    let (s, v) = call(
        &app,
        "PUT",
        "/api/cases/3%2F2020/annotation",
        Some(put_body(&gated, 2)),
    )
    .await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);
    assert_eq!(v["violations"][0]["kind"], "procedural_without_suitable");

    let wrong = annotation("1/2020", 0, None);
    let (s, _) = call(
        &app,
        "PUT",
        "/api/cases/3%2F2020/annotation",
        Some(put_body(&wrong, 2)),
    )
    .await;
    assert_eq!(s, StatusCode::UNPROCESSABLE_ENTITY);

    let (s, _) = call(
        &app,
        "PUT",
        "/api/cases/8%2F8/annotation",
        Some(put_body(&a, 0)),
    )
    .await;
    assert_eq!(s, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn stats_sentinel_then_single_row() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path());
    let (s, v) = call(&app, "GET", "/api/stats", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(v["annotated"], 0);
    assert!(v["table"].is_null());

    let a = annotation("1/2020", 1, Some(0));
    call(
        &app,
        "PUT",
        "/api/cases/1%2F2020/annotation",
        Some(put_body(&a, 0)),
    )
    .await;
    let (_, v) = call(&app, "GET", "/api/stats", None).await;
    assert_eq!(v["annotated"], 1);
    let rows = v["table"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r["all"]["trials"] == 1));
    assert_eq!(v["suitability"]["suitable"], 1);
}

#[tokio::test]
async fn rubric_and_index() {
    let dir = tempfile::tempdir().unwrap();
    let (app, _) = app(dir.path());
    let (s, v) = call(&app, "GET", "/api/rubric", None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .any(|e| e["id"] == "claims-absence"));
    let (s, v) = call(&app, "GET", "/", None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(v.as_str().unwrap().contains("/api/cases"));
}

#[tokio::test]
async fn stray_record_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let doc = CaseDocument::new("1/2020", "x", CaseMeta::default()).unwrap();
    let rec = parse_extraction("5/2020", &response("a", "b", "Other")).unwrap();
    let res = AppState::new(
        Corpus::new(vec![doc]).unwrap(),
        vec!["1/2020".into()],
        vec![rec],
        AnnotationStore::open(dir.path()).unwrap(),
    );
    assert!(res.is_err());
}
