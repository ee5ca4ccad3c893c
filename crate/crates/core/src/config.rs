//! Project configuration read from a TOML file. Relative paths resolve against
//! the directory holding the file.
//!
//! ```toml
//! [paths]
//! corpus = "corpus"
//! sample = "sample.json"
//! cache = "cache"
//! records = "records"
//! annotations = "annotations"
//!
//! [model]
//! model_id = "gpt-4-32k"
//! temperature = 0.0
//!
//! [gateway]
//! endpoint = "https://api.openai.com/v1/chat/completions"
//! rates = { prompt_per_1k = 0.06, completion_per_1k = 0.12 }
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extraction::AbsenceMarkers;
use crate::llm_gateway::GatewayConfig;
use crate::prompting::{ModelConfig, TemplateRef};
use crate::stats::{IntervalMethod, DEFAULT_RULE21_PHRASES};

pub const DEFAULT_PORT: u16 = 8787;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: toml::de::Error,
    },
    #[error("{path}: bad prompt reference: {message}")]
    Template { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Paths {
    pub corpus: PathBuf,
    pub sample: PathBuf,
    pub prompts: Option<PathBuf>,
    pub cache: PathBuf,
    pub responses: PathBuf,
    pub records: PathBuf,
    pub annotations: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self {
            corpus: "corpus".into(),
            sample: "sample.json".into(),
            prompts: None,
            cache: "cache".into(),
            responses: "responses".into(),
            records: "records".into(),
            annotations: "annotations".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExtractionSettings {
    pub template: String,
    pub absence_markers: AbsenceMarkers,
}

impl Default for ExtractionSettings {
    fn default() -> Self {
        Self {
            template: TemplateRef::final_prompt().to_string(),
            absence_markers: AbsenceMarkers::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StatsSettings {
    pub interval_method: IntervalMethod,
    pub rule21_phrases: Vec<String>,
}

impl Default for StatsSettings {
    fn default() -> Self {
        Self {
            interval_method: IntervalMethod::default(),
            rule21_phrases: DEFAULT_RULE21_PHRASES
                .iter()
                .map(|s| s.to_string())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ServiceSettings {
    pub port: u16,
    pub page_size: usize,
}

impl Default for ServiceSettings {
    fn default() -> Self {
        Self {
            port: DEFAULT_PORT,
            page_size: 50,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Config {
    pub paths: Paths,
    pub model: ModelConfig,
    pub gateway: GatewayConfig,
    pub extraction: ExtractionSettings,
    pub stats: StatsSettings,
    pub service: ServiceSettings,
    #[serde(skip)]
    base_dir: PathBuf,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: Config = toml::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        cfg.template().map_err(|message| ConfigError::Template {
            path: path.to_path_buf(),
            message,
        })?;
        Ok(cfg)
    }

    /// Joins a configured path onto the config file's directory.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn template(&self) -> Result<TemplateRef, String> {
        self.extraction.template.parse().map_err(|e| format!("{e}"))
    }

    pub fn gateway_with_env(&self) -> GatewayConfig {
        self.gateway.clone().with_env_credential()
    }
}
