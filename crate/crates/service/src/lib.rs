//! HTTP API for the quality-check workflow.
//!
//! | method | path                          | purpose                                  |
//! |--------|-------------------------------|------------------------------------------|
//! | GET    | `/api/cases?status=&page=`    | paged work list                          |
//! | GET    | `/api/cases/{id}`             | text, record, lint findings, annotation  |
//! | PUT    | `/api/cases/{id}/annotation`  | store an annotation (optimistic version) |
//! | GET    | `/api/stats`                  | accuracy table over annotated cases      |
//! | GET    | `/api/rubric`                 | annotator guidance                       |
//! | GET    | `/`                           | placeholder page for the review UI       |
//!
//! Case text and records are loaded once and never written; only the annotation
//! store changes.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::routing::get;
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use uket_core::corpus::{Corpus, CorpusError, SampleManifest};
use uket_core::extraction::{
    lint_record, load_records, ExtractionError, ExtractionRecord, LintFinding, OutcomeLabel,
};
use uket_core::quality_check::{
    rubric, validate_annotation, AnnotationStore, QcError, QualityAnnotation, StoredAnnotation,
    Violation,
};
use uket_core::stats::{
    accuracy_table, suitability_rate, AccuracyTable, IntervalMethod, SuitabilityReport,
};

pub const DEFAULT_PAGE_SIZE: usize = 50;
pub const MAX_PAGE_SIZE: usize = 500;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Records(#[from] ExtractionError),
    #[error(transparent)]
    Annotations(#[from] QcError),
    #[error("sampled case {0} is not in the corpus")]
    SampleNotInCorpus(String),
    #[error("record {0} does not belong to a sampled case")]
    StrayRecord(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Everything the handlers read. Cheap to clone.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    corpus: Corpus,
    sample: Vec<String>,
    records: BTreeMap<String, ExtractionRecord>,
    store: AnnotationStore,
    method: IntervalMethod,
    page_size: usize,
}

impl AppState {
    /// Records for unsampled cases are rejected so every view pairs a case
    /// with its own record.
    pub fn new(
        corpus: Corpus,
        sample: Vec<String>,
        records: Vec<ExtractionRecord>,
        store: AnnotationStore,
    ) -> Result<Self, ServiceError> {
        if let Some(missing) = sample.iter().find(|id| corpus.get(id).is_none()) {
            return Err(ServiceError::SampleNotInCorpus(missing.clone()));
        }
        let sampled: std::collections::BTreeSet<&String> = sample.iter().collect();
        if let Some(stray) = records.iter().find(|r| !sampled.contains(&r.case_id)) {
            return Err(ServiceError::StrayRecord(stray.case_id.clone()));
        }
        let records = records
            .into_iter()
            .map(|r| (r.case_id.clone(), r))
            .collect();
        Ok(Self {
            inner: Arc::new(Inner {
                corpus,
                sample,
                records,
                store,
                method: IntervalMethod::default(),
                page_size: DEFAULT_PAGE_SIZE,
            }),
        })
    }

    /// Loads the corpus directory, sample manifest, records directory and annotation store.
    pub fn load(
        corpus_dir: &Path,
        sample_path: &Path,
        records_dir: &Path,
        annotations_dir: &Path,
    ) -> Result<Self, ServiceError> {
        let corpus = Corpus::load_dir(corpus_dir)?;
        let sample = SampleManifest::load(sample_path)?.case_ids;
        let records = if records_dir.exists() {
            load_records(records_dir)?
        } else {
            Vec::new()
        };
        let store = AnnotationStore::open(annotations_dir)?;
        Self::new(corpus, sample, records, store)
    }

    pub fn with_method(mut self, method: IntervalMethod) -> Self {
        Arc::get_mut(&mut self.inner)
            .expect("configure before sharing")
            .method = method;
        self
    }

    pub fn with_page_size(mut self, page_size: usize) -> Self {
        Arc::get_mut(&mut self.inner)
            .expect("configure before sharing")
            .page_size = page_size.clamp(1, MAX_PAGE_SIZE);
        self
    }

    pub fn store(&self) -> &AnnotationStore {
        &self.inner.store
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/", get(index))
        .route("/api/cases", get(list_cases))
        .route("/api/cases/{id}", get(get_case))
        .route(
            "/api/cases/{id}/annotation",
            axum::routing::put(put_annotation),
        )
        .route("/api/stats", get(stats))
        .route("/api/rubric", get(get_rubric))
        .with_state(state)
}

pub async fn serve(state: AppState, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    tracing::info!(%addr, "annotation service listening");
    axum::serve(listener, router(state)).await
}

#[derive(Debug, Serialize)]
struct ApiError {
    error: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    violations: Vec<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    current_version: Option<u64>,
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (
        status,
        Json(ApiError {
            error: message.into(),
            violations: Vec::new(),
            current_version: None,
        }),
    )
        .into_response()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pending,
    Done,
    #[default]
    All,
}

#[derive(Debug, Deserialize)]
struct ListQuery {
    #[serde(default)]
    status: Status,
    #[serde(default)]
    page: usize,
    page_size: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CaseSummary {
    pub case_id: String,
    pub page_count: u32,
    pub status: Status,
    pub label: Option<OutcomeLabel>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CasePage {
    pub status: Status,
    pub page: usize,
    pub page_size: usize,
    pub total: usize,
    pub items: Vec<CaseSummary>,
}

async fn index() -> Html<&'static str> {
    Html(INDEX_HTML)
}

const INDEX_HTML: &str = r#"<!doctype html>
<html lang="en">
<head><meta charset="utf-8"><title>Quality check</title></head>
<body>
<h1>Quality check service</h1>
<p>The review interface is not bundled with this build. The JSON API is available:</p>
<ul>
<li><a href="/api/cases?status=pending">/api/cases?status=pending</a></li>
<li><a href="/api/stats">/api/stats</a></li>
<li><a href="/api/rubric">/api/rubric</a></li>
</ul>
</body>
</html>
"#;

async fn list_cases(State(state): State<AppState>, Query(q): Query<ListQuery>) -> Response {
    let s = &state.inner;
    let done = match s.store.annotated_ids() {
        Ok(d) => d,
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    };
    let page_size = q.page_size.unwrap_or(s.page_size).clamp(1, MAX_PAGE_SIZE);
    let matching: Vec<CaseSummary> = s
        .sample
        .iter()
        .filter_map(|id| {
            let status = if done.contains(id) {
                Status::Done
            } else {
                Status::Pending
            };
            if q.status != Status::All && q.status != status {
                return None;
            }
            Some(CaseSummary {
                case_id: id.clone(),
                page_count: s.corpus.get(id).map_or(0, |d| d.page_count),
                status,
                label: s.records.get(id).map(|r| r.outcome_label),
            })
        })
        .collect();
    let total = matching.len();
    let items = matching
        .into_iter()
        .skip(q.page.saturating_mul(page_size))
        .take(page_size)
        .collect();
    Json(CasePage {
        status: q.status,
        page: q.page,
        page_size,
        total,
        items,
    })
    .into_response()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CaseReviewView {
    pub case_id: String,
    pub body_text: String,
    pub page_count: u32,
    pub record: Option<ExtractionRecord>,
    pub lint_findings: Vec<LintFinding>,
    pub annotation: Option<QualityAnnotation>,
    /// 0 when nothing is stored yet; send this back as `expected_version`.
    pub version: u64,
    pub status: Status,
}

async fn get_case(State(state): State<AppState>, UrlPath(id): UrlPath<String>) -> Response {
    let s = &state.inner;
    let Some(doc) = s.sample.contains(&id).then(|| s.corpus.get(&id)).flatten() else {
        return error(StatusCode::NOT_FOUND, format!("unknown case {id}"));
    };
    let stored = match s.store.load(&id) {
        Ok(a) => a,
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    };
    let record = s.records.get(&id).cloned();
    let lint_findings = record.as_ref().map(lint_record).unwrap_or_default();
    let (annotation, version) = match stored {
        Some(StoredAnnotation {
            version,
            annotation,
        }) => (Some(annotation), version),
        None => (None, 0),
    };
    Json(CaseReviewView {
        case_id: id,
        body_text: doc.body_text.clone(),
        page_count: doc.page_count,
        record,
        lint_findings,
        status: if annotation.is_some() {
            Status::Done
        } else {
            Status::Pending
        },
        annotation,
        version,
    })
    .into_response()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AnnotationSubmission {
    pub annotation: QualityAnnotation,
    pub expected_version: u64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AnnotationAccepted {
    pub case_id: String,
    pub version: u64,
}

async fn put_annotation(
    State(state): State<AppState>,
    UrlPath(id): UrlPath<String>,
    Json(body): Json<AnnotationSubmission>,
) -> Response {
    let s = &state.inner;
    if !s.sample.contains(&id) {
        return error(StatusCode::NOT_FOUND, format!("unknown case {id}"));
    }
    if body.annotation.case_id != id {
        return error(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!(
                "annotation is for {} but was sent to {id}",
                body.annotation.case_id
            ),
        );
    }
    let violations = validate_annotation(&body.annotation);
    if !violations.is_empty() {
        return (
            StatusCode::UNPROCESSABLE_ENTITY,
            Json(ApiError {
                error: "annotation violates the rubric".into(),
                violations,
                current_version: None,
            }),
        )
            .into_response();
    }
    let state2 = state.clone();
    let result = tokio::task::spawn_blocking(move || {
        state2
            .inner
            .store
            .store(&body.annotation, body.expected_version)
    })
    .await;
    match result {
        Ok(Ok(version)) => Json(AnnotationAccepted {
            case_id: id,
            version,
        })
        .into_response(),
        Ok(Err(QcError::Conflict { current, .. })) => (
            StatusCode::CONFLICT,
            Json(ApiError {
                error: "stale version".into(),
                violations: Vec::new(),
                current_version: Some(current),
            }),
        )
            .into_response(),
        Ok(Err(QcError::Invalid { violations, .. })) => (
            StatusCode::UNPROCESSABLE_ENTITY,
            Json(ApiError {
                error: "annotation violates the rubric".into(),
                violations,
                current_version: None,
            }),
        )
            .into_response(),
        Ok(Err(e)) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct StatsView {
    pub annotated: usize,
    /// `None` is the empty-table sentinel: nothing annotated yet.
    pub table: Option<AccuracyTable>,
    pub suitability: Option<SuitabilityReport>,
}

async fn stats(State(state): State<AppState>) -> Response {
    let s = &state.inner;
    let stored = match s.store.load_all() {
        Ok(v) => v,
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    };
    let annotations: Vec<QualityAnnotation> = stored
        .into_iter()
        .map(|a| a.annotation)
        .filter(|a| s.records.contains_key(&a.case_id))
        .collect();
    if annotations.is_empty() {
        return Json(StatsView {
            annotated: 0,
            table: None,
            suitability: None,
        })
        .into_response();
    }
    let records: Vec<ExtractionRecord> = s.records.values().cloned().collect();
    let table = match accuracy_table(&annotations, &records, s.method) {
        Ok(t) => t,
        Err(e) => return error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    };
    let suitability = suitability_rate(&annotations, &s.corpus.page_counts()).ok();
    Json(StatsView {
        annotated: annotations.len(),
        table: Some(table),
        suitability,
    })
    .into_response()
}

async fn get_rubric() -> Json<rubric::Rubric> {
    Json(rubric::builtin())
}
