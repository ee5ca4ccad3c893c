//! Chat-completions dispatch with record/replay, bounded retries and spend accounting.

pub(crate) mod cache;
mod transport;

pub use cache::{CacheEntryMeta, CachedResponse, ReplayCache, ReplayKey};
pub use transport::{HttpReply, HttpTransport, OfflineTransport, Transport, TransportError};

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::prompting::ChatRequest;

pub const API_KEY_ENV: &str = "LLM_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Live,
    ReplayStrict,
    Record,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(Mode::Live),
            "replay-strict" => Ok(Mode::ReplayStrict),
            "record" => Ok(Mode::Record),
            other => Err(format!("unknown mode {other:?}")),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Live => "live",
            Mode::ReplayStrict => "replay-strict",
            Mode::Record => "record",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendTag {
    Live,
    Replay,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub raw_text: String,
    pub token_usage: TokenUsage,
    pub latency_ms: u64,
    pub backend_tag: BackendTag,
}

/// Price per thousand tokens, in the configured currency.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RateCard {
    pub prompt_per_1k: f64,
    pub completion_per_1k: f64,
}

impl RateCard {
    pub fn cost(&self, usage: TokenUsage) -> f64 {
        usage.prompt_tokens as f64 / 1000.0 * self.prompt_per_1k
            + usage.completion_tokens as f64 / 1000.0 * self.completion_per_1k
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatewayConfig {
    #[serde(default = "default_endpoint")]
    pub endpoint: String,
    #[serde(skip)]
    pub api_key: Option<String>,
    #[serde(default = "default_attempts")]
    pub max_attempts: u32,
    #[serde(default = "default_backoff_ms")]
    pub backoff_ms: u64,
    #[serde(default = "default_max_backoff_ms")]
    pub max_backoff_ms: u64,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
    #[serde(default)]
    pub rates: RateCard,
    #[serde(default)]
    pub spend_cap: Option<f64>,
    #[serde(default = "default_timeout_s")]
    pub timeout_s: u64,
}

fn default_endpoint() -> String {
    "https://api.openai.com/v1/chat/completions".into()
}
fn default_attempts() -> u32 {
    3
}
fn default_backoff_ms() -> u64 {
    1000
}
fn default_max_backoff_ms() -> u64 {
    60_000
}
fn default_in_flight() -> usize {
    4
}
fn default_timeout_s() -> u64 {
    600
}

impl Default for GatewayConfig {
    fn default() -> Self {
        Self {
            endpoint: default_endpoint(),
            api_key: None,
            max_attempts: default_attempts(),
            backoff_ms: default_backoff_ms(),
            max_backoff_ms: default_max_backoff_ms(),
            max_in_flight: default_in_flight(),
            rates: RateCard::default(),
            spend_cap: None,
            timeout_s: default_timeout_s(),
        }
    }
}

impl GatewayConfig {
    /// Reads the credential from `LLM_API_KEY`.
    pub fn with_env_credential(mut self) -> Self {
        self.api_key = std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty());
        self
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GatewayError {
    #[error("replay cache miss for key {0}")]
    CacheMiss(ReplayKey),
    #[error("mode {0} needs a replay cache directory")]
    NoCache(Mode),
    #[error("gave up after {attempts} attempts: {last}")]
    ExhaustedRetries { attempts: u32, last: String },
    #[error("authentication failed: {0}")]
    Authentication(String),
    #[error("spend cap reached: {spent:.4} of {cap:.4}")]
    OverBudget { spent: f64, cap: f64 },
    #[error("endpoint returned {status}: {body}")]
    Http { status: u16, body: String },
    #[error("malformed completion response: {0}")]
    MalformedResponse(String),
    #[error("replay cache io: {0}")]
    CacheIo(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SpendReport {
    pub requests: u64,
    pub live_requests: u64,
    pub replay_hits: u64,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub estimated_cost: f64,
}

struct InFlight {
    used: Mutex<usize>,
    freed: Condvar,
    limit: usize,
}

impl InFlight {
    fn acquire(&self) -> InFlightPermit<'_> {
        let mut used = self.used.lock().expect("in-flight lock poisoned");
        while *used >= self.limit {
            used = self.freed.wait(used).expect("in-flight lock poisoned");
        }
        *used += 1;
        InFlightPermit(self)
    }
}

struct InFlightPermit<'a>(&'a InFlight);

impl Drop for InFlightPermit<'_> {
    fn drop(&mut self) {
        *self.0.used.lock().expect("in-flight lock poisoned") -= 1;
        self.0.freed.notify_one();
    }
}

pub struct Gateway {
    config: GatewayConfig,
    transport: Arc<dyn Transport>,
    cache: Option<ReplayCache>,
    spend: Mutex<SpendReport>,
    in_flight: InFlight,
}

impl Gateway {
    pub fn new(
        config: GatewayConfig,
        transport: Arc<dyn Transport>,
        cache: Option<ReplayCache>,
    ) -> Self {
        let limit = config.max_in_flight.max(1);
        Self {
            config,
            transport,
            cache,
            spend: Mutex::new(SpendReport::default()),
            in_flight: InFlight {
                used: Mutex::new(0),
                freed: Condvar::new(),
                limit,
            },
        }
    }

    pub fn config(&self) -> &GatewayConfig {
        &self.config
    }

    pub fn cache(&self) -> Option<&ReplayCache> {
        self.cache.as_ref()
    }

    pub fn complete(
        &self,
        request: &ChatRequest,
        mode: Mode,
    ) -> Result<CompletionResult, GatewayError> {
        match mode {
            Mode::ReplayStrict => self.replay(request),
            Mode::Live => self.live(request),
            Mode::Record => {
                let cache = self.cache.as_ref().ok_or(GatewayError::NoCache(mode))?;
                let result = self.live(request)?;
                let key = request.replay_key();
                cache.put(
                    &key,
                    &result.raw_text,
                    &CacheEntryMeta {
                        template_id: request.template.id.clone(),
                        version: request.template.version.clone(),
                        case_id: request.case_id.clone(),
                        model_id: request.model_id.clone(),
                        temperature: request.temperature,
                        prompt_tokens: result.token_usage.prompt_tokens,
                        completion_tokens: result.token_usage.completion_tokens,
                        latency_ms: result.latency_ms,
                    },
                )?;
                Ok(result)
            }
        }
    }

    pub fn spend_report(&self) -> SpendReport {
        *self.spend.lock().expect("spend lock poisoned")
    }

    fn replay(&self, request: &ChatRequest) -> Result<CompletionResult, GatewayError> {
        let cache = self
            .cache
            .as_ref()
            .ok_or(GatewayError::NoCache(Mode::ReplayStrict))?;
        let started = Instant::now();
        let key = request.replay_key();
        let hit = cache.get(&key)?.ok_or(GatewayError::CacheMiss(key))?;
        let token_usage = hit
            .meta
            .map(|m| TokenUsage {
                prompt_tokens: m.prompt_tokens,
                completion_tokens: m.completion_tokens,
            })
            .unwrap_or_default();
        let mut spend = self.spend.lock().expect("spend lock poisoned");
        spend.requests += 1;
        spend.replay_hits += 1;
        Ok(CompletionResult {
            raw_text: hit.raw_text,
            token_usage,
            latency_ms: started.elapsed().as_millis() as u64,
            backend_tag: BackendTag::Replay,
        })
    }

    fn live(&self, request: &ChatRequest) -> Result<CompletionResult, GatewayError> {
        let api_key = self.config.api_key.clone().ok_or_else(|| {
            GatewayError::Authentication(format!("no credential; set {API_KEY_ENV}"))
        })?;
        if let Some(cap) = self.config.spend_cap {
            let spent = self.spend_report().estimated_cost;
            if spent >= cap {
                return Err(GatewayError::OverBudget { spent, cap });
            }
        }

        let _permit = self.in_flight.acquire();
        let body = request.to_wire_body();
        let attempts = self.config.max_attempts.max(1);
        let started = Instant::now();
        let mut last = String::new();

        for attempt in 1..=attempts {
            let wait = match self
                .transport
                .post_json(&self.config.endpoint, &api_key, &body)
            {
                Ok(reply) if (200..300).contains(&reply.status) => {
                    let (raw_text, token_usage) = parse_completion(&reply.body)?;
                    let latency_ms = started.elapsed().as_millis() as u64;
                    self.charge(token_usage);
                    return Ok(CompletionResult {
                        raw_text,
                        token_usage,
                        latency_ms,
                        backend_tag: BackendTag::Live,
                    });
                }
                Ok(reply) if reply.status == 401 || reply.status == 403 => {
                    return Err(GatewayError::Authentication(format!(
                        "status {}: {}",
                        reply.status, reply.body
                    )));
                }
                Ok(reply) if is_transient(reply.status) => {
                    last = format!("status {}", reply.status);
                    reply.retry_after
                }
                Ok(reply) => {
                    return Err(GatewayError::Http {
                        status: reply.status,
                        body: reply.body,
                    })
                }
                Err(e) => {
                    last = e.to_string();
                    None
                }
            };
            tracing::warn!(case = %request.case_id, attempt, %last, "transient failure");
            if attempt < attempts {
                std::thread::sleep(self.backoff(attempt, wait));
            }
        }
        Err(GatewayError::ExhaustedRetries { attempts, last })
    }

    fn backoff(&self, attempt: u32, retry_after: Option<Duration>) -> Duration {
        let exp = Duration::from_millis(
            self.config
                .backoff_ms
                .saturating_mul(1u64 << (attempt - 1).min(16)),
        );
        retry_after
            .unwrap_or(exp)
            .min(Duration::from_millis(self.config.max_backoff_ms))
    }

    fn charge(&self, usage: TokenUsage) {
        let mut spend = self.spend.lock().expect("spend lock poisoned");
        spend.requests += 1;
        spend.live_requests += 1;
        spend.prompt_tokens += usage.prompt_tokens;
        spend.completion_tokens += usage.completion_tokens;
        spend.estimated_cost += self.config.rates.cost(usage);
    }
}

fn is_transient(status: u16) -> bool {
    matches!(status, 408 | 429 | 500 | 502 | 503 | 504)
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<TokenUsage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

fn parse_completion(body: &str) -> Result<(String, TokenUsage), GatewayError> {
    let wire: WireResponse =
        serde_json::from_str(body).map_err(|e| GatewayError::MalformedResponse(e.to_string()))?;
    let text = wire
        .choices
        .into_iter()
        .next()
        .and_then(|c| c.message.content)
        .filter(|t| !t.is_empty())
        .ok_or_else(|| GatewayError::MalformedResponse("no message content".into()))?;
    Ok((text, wire.usage.unwrap_or_default()))
}
