//! Batch extraction over a sample: request, complete, store the raw response,
//! parse, store the record.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{case_file_stem, Corpus};
use crate::extraction::{parse_extraction_with, AbsenceMarkers, ExtractionError, ExtractionRecord};
use crate::llm_gateway::cache::write_atomic;
use crate::llm_gateway::{Gateway, Mode, SpendReport};
use crate::prompting::{build_request, ModelConfig, PromptRegistry, TemplateRef};

/// Maps response file stems back to case ids.
pub const RESPONSE_INDEX: &str = "index.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("could not build a thread pool: {0}")]
    Pool(String),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseFailure {
    pub case_id: String,
    pub stage: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractReport {
    pub mode: Mode,
    pub attempted: usize,
    pub parsed: usize,
    pub failures: Vec<CaseFailure>,
    pub spend: SpendReport,
}

pub struct ExtractJob<'a> {
    pub corpus: &'a Corpus,
    pub case_ids: &'a [String],
    pub registry: &'a PromptRegistry,
    pub template: TemplateRef,
    pub model: ModelConfig,
    pub markers: AbsenceMarkers,
    pub mode: Mode,
    pub responses_dir: PathBuf,
    pub records_dir: PathBuf,
    /// Worker threads; the gateway still caps live requests in flight.
    pub threads: usize,
}

fn failure(case_id: &str, stage: &str, message: impl ToString) -> CaseFailure {
    CaseFailure {
        case_id: case_id.to_string(),
        stage: stage.to_string(),
        message: message.to_string(),
    }
}

/// Runs every case through the gateway and parser. Per-case problems become
/// [`CaseFailure`]s; only output-directory errors abort the run.
pub fn run_extract(
    job: &ExtractJob<'_>,
    gateway: &Gateway,
) -> Result<ExtractReport, PipelineError> {
    fs::create_dir_all(&job.responses_dir).map_err(io_err(&job.responses_dir))?;
    fs::create_dir_all(&job.records_dir).map_err(io_err(&job.records_dir))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(job.threads.max(1))
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))?;

    let outcomes: Vec<Result<(), CaseFailure>> = pool.install(|| {
        job.case_ids
            .par_iter()
            .map(|id| extract_one(job, gateway, id))
            .collect()
    });

    let index: BTreeMap<String, String> = job
        .case_ids
        .iter()
        .map(|id| (case_file_stem(id), id.clone()))
        .collect();
    write_index(&job.responses_dir, &index)?;

    let failures: Vec<CaseFailure> = outcomes.into_iter().filter_map(Result::err).collect();
    for f in &failures {
        tracing::warn!(case_id = %f.case_id, stage = %f.stage, "{}", f.message);
    }
    Ok(ExtractReport {
        mode: job.mode,
        attempted: job.case_ids.len(),
        parsed: job.case_ids.len() - failures.len(),
        failures,
        spend: gateway.spend_report(),
    })
}

fn extract_one(job: &ExtractJob<'_>, gateway: &Gateway, case_id: &str) -> Result<(), CaseFailure> {
    let doc = job
        .corpus
        .get(case_id)
        .ok_or_else(|| failure(case_id, "corpus", "case not in corpus"))?;
    let request = build_request(job.registry, &job.template, doc, &job.model)
        .map_err(|e| failure(case_id, "prompt", e))?;
    let result = gateway
        .complete(&request, job.mode)
        .map_err(|e| failure(case_id, "gateway", e))?;

    let raw_path = job
        .responses_dir
        .join(format!("{}.txt", case_file_stem(case_id)));
    write_atomic(&raw_path, result.raw_text.as_bytes())
        .map_err(|e| failure(case_id, "responses", e))?;

    let record = parse_extraction_with(case_id, &result.raw_text, &job.markers)
        .map_err(|e| failure(case_id, "parse", e))?;
    record
        .save_in(&job.records_dir)
        .map_err(|e| failure(case_id, "records", e))?;
    Ok(())
}

fn write_index(dir: &Path, index: &BTreeMap<String, String>) -> Result<(), PipelineError> {
    let path = dir.join(RESPONSE_INDEX);
    let mut merged = read_index(dir)?;
    merged.extend(index.iter().map(|(k, v)| (k.clone(), v.clone())));
    let mut body = serde_json::to_vec_pretty(&merged).map_err(|source| PipelineError::Json {
        path: path.clone(),
        source,
    })?;
    body.push(b'\n');
    write_atomic(&path, &body).map_err(io_err(&path))
}

fn read_index(dir: &Path) -> Result<BTreeMap<String, String>, PipelineError> {
    let path = dir.join(RESPONSE_INDEX);
    match fs::read_to_string(&path) {
        Ok(text) => {
            serde_json::from_str(&text).map_err(|source| PipelineError::Json { path, source })
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(BTreeMap::new()),
        Err(source) => Err(PipelineError::Io { path, source }),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseReport {
    pub parsed: usize,
    pub failures: Vec<CaseFailure>,
}

/// Parses every `*.txt` response in `responses_dir` into `records_dir`. Case ids
/// come from the directory's index, falling back to the stem with `_` read as `/`.
pub fn parse_dir(
    responses_dir: &Path,
    records_dir: &Path,
    markers: &AbsenceMarkers,
) -> Result<ParseReport, PipelineError> {
    let index = read_index(responses_dir)?;
    let mut files = Vec::new();
    for entry in fs::read_dir(responses_dir).map_err(io_err(responses_dir))? {
        let path = entry.map_err(io_err(responses_dir))?.path();
        if path.extension().is_some_and(|e| e == "txt") {
            files.push(path);
        }
    }
    files.sort();
    fs::create_dir_all(records_dir).map_err(io_err(records_dir))?;

    let mut report = ParseReport {
        parsed: 0,
        failures: Vec::new(),
    };
    for path in files {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let case_id = index
            .get(&stem)
            .cloned()
            .unwrap_or_else(|| stem.replace('_', "/"));
        let raw = fs::read_to_string(&path).map_err(io_err(&path))?;
        match parse_extraction_with(&case_id, &raw, markers) {
            Ok(record) => {
                save(&record, records_dir)?;
                report.parsed += 1;
            }
            Err(e) => report.failures.push(failure(&case_id, "parse", e)),
        }
    }
    Ok(report)
}

fn save(record: &ExtractionRecord, dir: &Path) -> Result<(), PipelineError> {
    record.save_in(dir).map(|_| ()).map_err(|e| match e {
        ExtractionError::Io { path, source } => PipelineError::Io { path, source },
        ExtractionError::Json { path, source } => PipelineError::Json { path, source },
        other => PipelineError::Io {
            path: dir.to_path_buf(),
            source: std::io::Error::other(other.to_string()),
        },
    })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::corpus::{CaseDocument, CaseMeta};
    use crate::llm_gateway::{CacheEntryMeta, GatewayConfig, OfflineTransport, ReplayCache};

    const RESPONSE: &str = "1. Facts of the case: The claimant was a welder.\n\
        2. Claims made: Unfair dismissal.\n\
        3. References to legal statutes: Employment Rights Act 1996.\n\
        4. References to precedents: There are no references to precedents.\n\
        5. General case outcome: The claim succeeded.\n\
        6. General case outcome summarised: Claimant wins.\n\
        7. Detailed order and remedies: The respondent shall pay £900.\n\
        8. Essential reasons for the decision: No fair reason was shown.";

    #[test]
    fn replay_extract_then_reparse() {
        let dir = tempfile::tempdir().unwrap();
        let doc = CaseDocument::new("77/2020", "Judgment text.", CaseMeta::default()).unwrap();
        let corpus = Corpus::new(vec![doc.clone()]).unwrap();
        let registry = PromptRegistry::builtin();
        let model = ModelConfig::default();
        let template = TemplateRef::final_prompt();

        let cache = ReplayCache::open(dir.path().join("cache")).unwrap();
        let req = build_request(&registry, &template, &doc, &model).unwrap();
        let meta = CacheEntryMeta {
            template_id: req.template.id.clone(),
            version: req.template.version.clone(),
            case_id: req.case_id.clone(),
            model_id: req.model_id.clone(),
            temperature: req.temperature,
            prompt_tokens: 10,
            completion_tokens: 5,
            latency_ms: 0,
        };
        cache.put(&req.replay_key(), RESPONSE, &meta).unwrap();

        let transport = Arc::new(OfflineTransport::default());
        let gateway = Gateway::new(GatewayConfig::default(), transport.clone(), Some(cache));
        let ids = vec!["77/2020".to_string(), "missing/1".to_string()];
        let job = ExtractJob {
            corpus: &corpus,
            case_ids: &ids,
            registry: &registry,
            template,
            model,
            markers: AbsenceMarkers::default(),
            mode: Mode::ReplayStrict,
            responses_dir: dir.path().join("responses"),
            records_dir: dir.path().join("records"),
            threads: 2,
        };
        let report = run_extract(&job, &gateway).unwrap();
        assert_eq!(report.parsed, 1);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].stage, "corpus");
        assert_eq!(transport.contacts(), 0);

        let rec_path = dir.path().join("records/77_2020.json");
        let first = fs::read(&rec_path).unwrap();
        let again = dir.path().join("records2");
        let pr = parse_dir(
            &dir.path().join("responses"),
            &again,
            &AbsenceMarkers::default(),
        )
        .unwrap();
        assert_eq!(pr.parsed, 1);
        assert_eq!(fs::read(again.join("77_2020.json")).unwrap(), first);
    }
}
