//! Versioned prompt registry and per-case chat request construction.
//!
//! Templates live on disk as `prompts/<id>/<version>.txt`, indexed by
//! `prompts/registry.toml`. The final extraction prompt ships built in as
//! `uket-final/v1`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, RwLock};

use serde::{Deserialize, Serialize};

use crate::corpus::CaseDocument;
use crate::llm_gateway::ReplayKey;

pub const FINAL_TEMPLATE_ID: &str = "uket-final";
pub const FINAL_TEMPLATE_VERSION: &str = "v1";
pub const REGISTRY_INDEX: &str = "registry.toml";

const FINAL_PROMPT_TEXT: &str = include_str!("../prompts/uket-final/v1.txt");
const FINAL_PROMPT_SUMMARY: &str =
    "Final eight-aspect extraction prompt with four-label outcome taxonomy";

#[derive(Debug, thiserror::Error)]
pub enum PromptError {
    #[error("unknown template {0}")]
    UnknownTemplate(TemplateRef),
    #[error("duplicate template {0}")]
    DuplicateTemplate(TemplateRef),
    #[error("template {0} has empty text")]
    EmptyTemplate(TemplateRef),
    #[error("malformed template reference {0:?}; expected <id>/<version>")]
    BadReference(String),
    #[error("case {0:?} has an empty body")]
    EmptyCaseBody(String),
    #[error("negative temperature {0}")]
    BadTemperature(f64),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed registry index {path}: {message}")]
    Index { path: PathBuf, message: String },
}

/// `<template_id>/<version>`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TemplateRef {
    pub id: String,
    pub version: String,
}

impl TemplateRef {
    pub fn new(id: impl Into<String>, version: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            version: version.into(),
        }
    }

    pub fn final_prompt() -> Self {
        Self::new(FINAL_TEMPLATE_ID, FINAL_TEMPLATE_VERSION)
    }
}

impl fmt::Display for TemplateRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.id, self.version)
    }
}

impl FromStr for TemplateRef {
    type Err = PromptError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.split_once('/') {
            Some((id, version))
                if !id.is_empty() && !version.is_empty() && !version.contains('/') =>
            {
                Ok(Self::new(id, version))
            }
            _ => Err(PromptError::BadReference(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub template_id: String,
    pub version: String,
    pub summary: String,
    /// System message text sent verbatim.
    pub text: String,
}

impl PromptTemplate {
    pub fn reference(&self) -> TemplateRef {
        TemplateRef::new(&self.template_id, &self.version)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TemplateListing {
    pub template_id: String,
    pub version: String,
    pub summary: String,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct RegistryIndex {
    #[serde(default, rename = "template")]
    templates: Vec<IndexEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct IndexEntry {
    id: String,
    version: String,
    #[serde(default)]
    summary: String,
}

/// Read-mostly template registry. Lookups take a shared lock; registration is
/// serialized behind the write lock.
#[derive(Debug)]
pub struct PromptRegistry {
    templates: RwLock<BTreeMap<TemplateRef, Arc<PromptTemplate>>>,
    dir: Option<PathBuf>,
}

impl Default for PromptRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

impl PromptRegistry {
    /// Registry holding only the shipped `uket-final/v1` template.
    pub fn builtin() -> Self {
        let mut templates = BTreeMap::new();
        let t = PromptTemplate {
            template_id: FINAL_TEMPLATE_ID.into(),
            version: FINAL_TEMPLATE_VERSION.into(),
            summary: FINAL_PROMPT_SUMMARY.into(),
            text: FINAL_PROMPT_TEXT.into(),
        };
        templates.insert(t.reference(), Arc::new(t));
        Self {
            templates: RwLock::new(templates),
            dir: None,
        }
    }

    /// Built-in templates plus every entry of `<dir>/registry.toml`.
    ///
    /// An index entry may restate a built-in template only with byte-identical text.
    pub fn load_dir(dir: &Path) -> Result<Self, PromptError> {
        let mut registry = Self::builtin();
        registry.dir = Some(dir.to_path_buf());
        let index_path = dir.join(REGISTRY_INDEX);
        if !index_path.exists() {
            return Ok(registry);
        }
        let raw = fs::read_to_string(&index_path).map_err(|source| PromptError::Io {
            path: index_path.clone(),
            source,
        })?;
        let index: RegistryIndex = toml::from_str(&raw).map_err(|e| PromptError::Index {
            path: index_path.clone(),
            message: e.to_string(),
        })?;

        let builtin = registry.templates.get_mut().expect("fresh lock");
        let mut seen = std::collections::BTreeSet::new();
        for entry in index.templates {
            let reference = TemplateRef::new(&entry.id, &entry.version);
            if !seen.insert(reference.clone()) {
                return Err(PromptError::DuplicateTemplate(reference));
            }
            let path = template_path(dir, &reference);
            let text = fs::read_to_string(&path).map_err(|source| PromptError::Io {
                path: path.clone(),
                source,
            })?;
            if text.is_empty() {
                return Err(PromptError::EmptyTemplate(reference));
            }
            if let Some(existing) = builtin.get(&reference) {
                if existing.text == text {
                    continue;
                }
                return Err(PromptError::DuplicateTemplate(reference));
            }
            builtin.insert(
                reference,
                Arc::new(PromptTemplate {
                    template_id: entry.id,
                    version: entry.version,
                    summary: entry.summary,
                    text,
                }),
            );
        }
        Ok(registry)
    }

    pub fn get(&self, reference: &TemplateRef) -> Result<Arc<PromptTemplate>, PromptError> {
        self.templates
            .read()
            .expect("registry lock poisoned")
            .get(reference)
            .cloned()
            .ok_or_else(|| PromptError::UnknownTemplate(reference.clone()))
    }

    pub fn list_templates(&self) -> Vec<TemplateListing> {
        self.templates
            .read()
            .expect("registry lock poisoned")
            .values()
            .map(|t| TemplateListing {
                template_id: t.template_id.clone(),
                version: t.version.clone(),
                summary: t.summary.clone(),
            })
            .collect()
    }

    /// Adds a template; when the registry is directory-backed the text file and
    /// index entry are written as well.
    pub fn register(&self, template: PromptTemplate) -> Result<(), PromptError> {
        let reference = template.reference();
        if template.text.is_empty() {
            return Err(PromptError::EmptyTemplate(reference));
        }
        let mut guard = self.templates.write().expect("registry lock poisoned");
        if guard.contains_key(&reference) {
            return Err(PromptError::DuplicateTemplate(reference));
        }
        if let Some(dir) = &self.dir {
            persist(dir, &template)?;
        }
        guard.insert(reference, Arc::new(template));
        Ok(())
    }
}

fn template_path(dir: &Path, reference: &TemplateRef) -> PathBuf {
    dir.join(&reference.id)
        .join(format!("{}.txt", reference.version))
}

fn persist(dir: &Path, template: &PromptTemplate) -> Result<(), PromptError> {
    let reference = template.reference();
    let path = template_path(dir, &reference);
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| PromptError::Io { path, source }
    };
    fs::create_dir_all(path.parent().expect("template path has a parent")).map_err(io(&path))?;
    fs::write(&path, &template.text).map_err(io(&path))?;

    let index_path = dir.join(REGISTRY_INDEX);
    let mut index: RegistryIndex = match fs::read_to_string(&index_path) {
        Ok(raw) => toml::from_str(&raw).map_err(|e| PromptError::Index {
            path: index_path.clone(),
            message: e.to_string(),
        })?,
        Err(_) => RegistryIndex::default(),
    };
    index.templates.push(IndexEntry {
        id: template.template_id.clone(),
        version: template.version.clone(),
        summary: template.summary.clone(),
    });
    let raw = toml::to_string(&index).map_err(|e| PromptError::Index {
        path: index_path.clone(),
        message: e.to_string(),
    })?;
    fs::write(&index_path, raw).map_err(io(&index_path))
}

/// Decoding parameters for one extraction run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub model_id: String,
    #[serde(default)]
    pub temperature: f64,
    #[serde(default = "default_max_output_tokens")]
    pub max_output_tokens: u32,
}

fn default_max_output_tokens() -> u32 {
    4096
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            model_id: "gpt-4-32k".into(),
            temperature: 0.0,
            max_output_tokens: default_max_output_tokens(),
        }
    }
}

/// A system + user chat request for one case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub template: TemplateRef,
    pub case_id: String,
    pub system_text: String,
    pub user_text: String,
    pub model_id: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

impl ChatRequest {
    pub fn replay_key(&self) -> ReplayKey {
        ReplayKey::new(
            &self.template.id,
            &self.template.version,
            &self.case_id,
            &self.model_id,
            self.temperature,
        )
    }

    /// Chat-completions request body.
    pub fn to_wire_body(&self) -> serde_json::Value {
        serde_json::json!({
            "model": self.model_id,
            "messages": [
                { "role": "system", "content": self.system_text },
                { "role": "user", "content": self.user_text },
            ],
            "temperature": self.temperature,
            "max_tokens": self.max_output_tokens,
        })
    }
}

pub fn build_request(
    registry: &PromptRegistry,
    template: &TemplateRef,
    case: &CaseDocument,
    model: &ModelConfig,
) -> Result<ChatRequest, PromptError> {
    let t = registry.get(template)?;
    if case.body_text.is_empty() {
        return Err(PromptError::EmptyCaseBody(case.case_id.clone()));
    }
    if model.temperature.is_nan() || model.temperature < 0.0 {
        return Err(PromptError::BadTemperature(model.temperature));
    }
    Ok(ChatRequest {
        template: template.clone(),
        case_id: case.case_id.clone(),
        system_text: t.text.clone(),
        user_text: case.body_text.clone(),
        model_id: model.model_id.clone(),
        temperature: model.temperature,
        max_output_tokens: model.max_output_tokens,
    })
}
