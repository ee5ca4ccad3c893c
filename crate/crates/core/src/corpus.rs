//! Judgment corpus loading, page-count stratification and seeded stratified sampling.
//!
//! A corpus on disk is a directory of UTF-8 transcripts named after the case id
//! (with `/` replaced by `_`) plus a `manifest.json` that maps every case id to its
//! metadata. Page counts come from the manifest when present and fall back to
//! [`estimate_page_count`] otherwise.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Characters per page assumed when the manifest carries no page count.
pub const CHARS_PER_PAGE: usize = 3000;

/// Largest page count that has a bucket of its own; longer cases share `>20`.
pub const MAX_SINGLE_BUCKET: u32 = 20;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("invalid document {case_id:?}: {reason}")]
    InvalidDocument { case_id: String, reason: String },
    #[error("corpus integrity: duplicate case id {0:?}")]
    DuplicateCase(String),
    #[error("invalid sample plan: {0}")]
    InvalidPlan(String),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed json in {path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CorpusError + '_ {
    move |source| CorpusError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// File stem used for every per-case artifact (transcripts, records, annotations).
pub fn case_file_stem(case_id: &str) -> String {
    case_id.replace('/', "_")
}

/// Optional tribunal metadata carried alongside a transcript.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub page_count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filing_date: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision_date: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hearing_venue: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub jurisdiction_codes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub judges: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub claimants: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub respondents: Vec<String>,
}

/// One judgment transcript.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CaseDocument {
    pub case_id: String,
    pub body_text: String,
    pub page_count: u32,
    pub meta: CaseMeta,
}

impl CaseDocument {
    /// Builds a document, taking the page count from `meta` or estimating it from the text.
    pub fn new(
        case_id: impl Into<String>,
        body_text: impl Into<String>,
        meta: CaseMeta,
    ) -> Result<Self, CorpusError> {
        let case_id = case_id.into();
        let body_text = body_text.into();
        if case_id.trim().is_empty() {
            return Err(CorpusError::InvalidDocument {
                case_id,
                reason: "empty case id".into(),
            });
        }
        let page_count = match meta.page_count {
            Some(0) => {
                return Err(CorpusError::InvalidDocument {
                    case_id,
                    reason: "page_count must be at least 1".into(),
                })
            }
            Some(n) => {
                if body_text.is_empty() {
                    return Err(CorpusError::InvalidDocument {
                        case_id,
                        reason: "empty body text".into(),
                    });
                }
                n
            }
            None => estimate_page_count(&body_text).map_err(|_| CorpusError::InvalidDocument {
                case_id: case_id.clone(),
                reason: "empty body text".into(),
            })?,
        };
        Ok(Self {
            case_id,
            body_text,
            page_count,
            meta,
        })
    }

    pub fn bucket(&self) -> Bucket {
        Bucket::for_pages(self.page_count)
    }
}

/// Fallback page count: one page per [`CHARS_PER_PAGE`] characters, at least one.
pub fn estimate_page_count(body_text: &str) -> Result<u32, CorpusError> {
    if body_text.is_empty() {
        return Err(CorpusError::InvalidDocument {
            case_id: String::new(),
            reason: "empty body text".into(),
        });
    }
    let chars = body_text.chars().count();
    let pages = chars.div_ceil(CHARS_PER_PAGE).max(1);
    Ok(u32::try_from(pages).unwrap_or(u32::MAX))
}

/// Page-count stratum: a single page count `1..=20` or the open `>20` bucket.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bucket {
    Pages(u32),
    Over20,
}

impl Bucket {
    pub fn for_pages(pages: u32) -> Self {
        if pages <= MAX_SINGLE_BUCKET {
            Bucket::Pages(pages.max(1))
        } else {
            Bucket::Over20
        }
    }

    /// All 21 buckets in ascending order.
    pub fn all() -> impl Iterator<Item = Bucket> {
        (1..=MAX_SINGLE_BUCKET)
            .map(Bucket::Pages)
            .chain(std::iter::once(Bucket::Over20))
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bucket::Pages(n) => write!(f, "{n}"),
            Bucket::Over20 => f.write_str(">20"),
        }
    }
}

impl FromStr for Bucket {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == ">20" {
            return Ok(Bucket::Over20);
        }
        match s.parse::<u32>() {
            Ok(n) if (1..=MAX_SINGLE_BUCKET).contains(&n) => Ok(Bucket::Pages(n)),
            _ => Err(CorpusError::InvalidPlan(format!("unknown bucket {s:?}"))),
        }
    }
}

impl Serialize for Bucket {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Bucket {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stratum {
    pub bucket: Bucket,
    pub target: usize,
}

/// Ordered per-bucket sampling targets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplePlan {
    pub strata: Vec<Stratum>,
}

/// Per-bucket targets of the 260-case annotated sample.
const TABLE1_TARGETS: [usize; 21] = [
    163, 43, 9, 6, 4, 3, 2, 2, 2, 2, 2, 2, 2, 1, 1, 1, 1, 1, 1, 1, 11,
];

impl SamplePlan {
    /// Validates that every bucket appears exactly once.
    pub fn new(strata: Vec<Stratum>) -> Result<Self, CorpusError> {
        let plan = Self { strata };
        plan.validate()?;
        Ok(plan)
    }

    /// The 260-case page-count plan (163 one-page cases down to 11 cases over 20 pages).
    pub fn table1() -> Self {
        let strata = Bucket::all()
            .zip(TABLE1_TARGETS)
            .map(|(bucket, target)| Stratum { bucket, target })
            .collect();
        Self { strata }
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let mut seen = BTreeSet::new();
        for s in &self.strata {
            if let Bucket::Pages(n) = s.bucket {
                if !(1..=MAX_SINGLE_BUCKET).contains(&n) {
                    return Err(CorpusError::InvalidPlan(format!("bucket {n} out of range")));
                }
            }
            if !seen.insert(s.bucket) {
                return Err(CorpusError::InvalidPlan(format!(
                    "bucket {} listed twice",
                    s.bucket
                )));
            }
        }
        if let Some(missing) = Bucket::all().find(|b| !seen.contains(b)) {
            return Err(CorpusError::InvalidPlan(format!(
                "bucket {missing} not covered"
            )));
        }
        Ok(())
    }

    pub fn total_target(&self) -> usize {
        self.strata.iter().map(|s| s.target).sum()
    }

    /// Loads a plan from a JSON file, or returns the built-in plan for `"table1"`.
    pub fn resolve(name_or_path: &str) -> Result<Self, CorpusError> {
        if name_or_path == "table1" {
            return Ok(Self::table1());
        }
        let path = Path::new(name_or_path);
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        let plan: SamplePlan = serde_json::from_str(&text).map_err(|source| CorpusError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        plan.validate()?;
        Ok(plan)
    }
}

/// A validated set of documents with unique case ids.
#[derive(Debug, Clone, Default)]
pub struct Corpus {
    docs: Vec<CaseDocument>,
}

impl Corpus {
    pub fn new(docs: Vec<CaseDocument>) -> Result<Self, CorpusError> {
        check_unique(&docs)?;
        Ok(Self { docs })
    }

    pub fn docs(&self) -> &[CaseDocument] {
        &self.docs
    }

    pub fn len(&self) -> usize {
        self.docs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.docs.is_empty()
    }

    pub fn get(&self, case_id: &str) -> Option<&CaseDocument> {
        self.docs.iter().find(|d| d.case_id == case_id)
    }

    pub fn page_counts(&self) -> BTreeMap<String, u32> {
        self.docs
            .iter()
            .map(|d| (d.case_id.clone(), d.page_count))
            .collect()
    }

    /// Reads `manifest.json` and one transcript per manifest entry.
    pub fn load_dir(dir: &Path) -> Result<Self, CorpusError> {
        let manifest_path = dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&manifest_path).map_err(io_err(&manifest_path))?;
        let manifest: BTreeMap<String, CaseMeta> =
            serde_json::from_str(&text).map_err(|source| CorpusError::Json {
                path: manifest_path.clone(),
                source,
            })?;

        let mut docs = Vec::with_capacity(manifest.len());
        for (case_id, meta) in manifest {
            let path = dir.join(format!("{}.txt", case_file_stem(&case_id)));
            let body = fs::read_to_string(&path).map_err(io_err(&path))?;
            docs.push(CaseDocument::new(case_id, body, meta)?);
        }

        let listed: BTreeSet<String> = docs
            .iter()
            .map(|d| format!("{}.txt", case_file_stem(&d.case_id)))
            .collect();
        if let Ok(entries) = fs::read_dir(dir) {
            for entry in entries.flatten() {
                let name = entry.file_name().to_string_lossy().into_owned();
                if name.ends_with(".txt") && !listed.contains(&name) {
                    tracing::warn!(file = %name, "transcript not listed in manifest; ignored");
                }
            }
        }
        Self::new(docs)
    }

    /// Writes transcripts plus manifest; the inverse of [`Corpus::load_dir`].
    pub fn write_dir(&self, dir: &Path) -> Result<(), CorpusError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let mut manifest = BTreeMap::new();
        for doc in &self.docs {
            let path = dir.join(format!("{}.txt", case_file_stem(&doc.case_id)));
            fs::write(&path, &doc.body_text).map_err(io_err(&path))?;
            manifest.insert(doc.case_id.clone(), doc.meta.clone());
        }
        let path = dir.join(MANIFEST_FILE);
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        fs::write(&path, json + "\n").map_err(io_err(&path))
    }
}

fn check_unique(docs: &[CaseDocument]) -> Result<(), CorpusError> {
    let mut seen = BTreeSet::new();
    for doc in docs {
        if !seen.insert(doc.case_id.as_str()) {
            return Err(CorpusError::DuplicateCase(doc.case_id.clone()));
        }
    }
    Ok(())
}

/// Assigns each case to its page-count bucket. Every bucket is present in the result,
/// and ids within a bucket keep corpus order.
pub fn stratify(docs: &[CaseDocument]) -> Result<BTreeMap<Bucket, Vec<String>>, CorpusError> {
    check_unique(docs)?;
    let mut buckets: BTreeMap<Bucket, Vec<String>> =
        Bucket::all().map(|b| (b, Vec::new())).collect();
    for doc in docs {
        buckets
            .entry(doc.bucket())
            .or_default()
            .push(doc.case_id.clone());
    }
    Ok(buckets)
}

/// A bucket that held fewer cases than its target.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shortfall {
    pub bucket: Bucket,
    pub target: usize,
    pub available: usize,
}

/// Result of [`sample`], persisted as `sample.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleManifest {
    pub seed: u64,
    pub plan: SamplePlan,
    pub case_ids: Vec<String>,
    pub drawn_per_bucket: BTreeMap<Bucket, usize>,
    pub shortfalls: Vec<Shortfall>,
}

impl SampleManifest {
    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        serde_json::from_str(&text).map_err(|source| CorpusError::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        let json = serde_json::to_string_pretty(self).expect("sample manifest serializes");
        fs::write(path, json + "\n").map_err(io_err(path))
    }
}

/// Draws `min(target, available)` cases uniformly without replacement from every
/// stratum, in plan order. Within a bucket, candidates are ordered by case id
/// before drawing so the result depends only on the corpus contents, the plan and
/// the seed.
pub fn sample(
    docs: &[CaseDocument],
    plan: &SamplePlan,
    seed: u64,
) -> Result<SampleManifest, CorpusError> {
    plan.validate()?;
    let mut buckets = stratify(docs)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut case_ids = Vec::with_capacity(plan.total_target());
    let mut drawn_per_bucket = BTreeMap::new();
    let mut shortfalls = Vec::new();

    for stratum in &plan.strata {
        let mut candidates = buckets.remove(&stratum.bucket).unwrap_or_default();
        candidates.sort();
        let take = stratum.target.min(candidates.len());
        if take < stratum.target {
            tracing::warn!(
                bucket = %stratum.bucket,
                target = stratum.target,
                available = candidates.len(),
                "stratum shortfall; taking every available case"
            );
            shortfalls.push(Shortfall {
                bucket: stratum.bucket,
                target: stratum.target,
                available: candidates.len(),
            });
        }
        for idx in rand::seq::index::sample(&mut rng, candidates.len(), take) {
            case_ids.push(candidates[idx].clone());
        }
        drawn_per_bucket.insert(stratum.bucket, take);
    }

    Ok(SampleManifest {
        seed,
        plan: plan.clone(),
        case_ids,
        drawn_per_bucket,
        shortfalls,
    })
}
