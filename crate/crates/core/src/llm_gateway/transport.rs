//! HTTP transport seam. The gateway talks to this trait so tests can script
//! replies or assert that no network contact happens.

use std::time::Duration;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpReply {
    pub status: u16,
    pub body: String,
    pub retry_after: Option<Duration>,
}

/// Connection-level failure (DNS, reset, timeout). Always treated as transient.
#[derive(Debug, Clone, thiserror::Error)]
#[error("transport failure: {0}")]
pub struct TransportError(pub String);

pub trait Transport: Send + Sync {
    fn post_json(
        &self,
        url: &str,
        bearer_token: &str,
        body: &serde_json::Value,
    ) -> Result<HttpReply, TransportError>;
}

/// Blocking reqwest transport used for live calls.
pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Result<Self, TransportError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| TransportError(e.to_string()))?;
        Ok(Self { client })
    }
}

impl Transport for HttpTransport {
    fn post_json(
        &self,
        url: &str,
        bearer_token: &str,
        body: &serde_json::Value,
    ) -> Result<HttpReply, TransportError> {
        let resp = self
            .client
            .post(url)
            .bearer_auth(bearer_token)
            .json(body)
            .send()
            .map_err(|e| TransportError(e.to_string()))?;
        let status = resp.status().as_u16();
        let retry_after = resp
            .headers()
            .get(reqwest::header::RETRY_AFTER)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(Duration::from_secs);
        let body = resp.text().map_err(|e| TransportError(e.to_string()))?;
        Ok(HttpReply {
            status,
            body,
            retry_after,
        })
    }
}

/// Transport for replay-only runs: any contact is an error and is counted.
#[derive(Debug, Default)]
pub struct OfflineTransport {
    contacts: std::sync::atomic::AtomicUsize,
}

impl OfflineTransport {
    pub fn contacts(&self) -> usize {
        self.contacts.load(std::sync::atomic::Ordering::SeqCst)
    }
}

impl Transport for OfflineTransport {
    fn post_json(
        &self,
        url: &str,
        _bearer_token: &str,
        _body: &serde_json::Value,
    ) -> Result<HttpReply, TransportError> {
        self.contacts
            .fetch_add(1, std::sync::atomic::Ordering::SeqCst);
        Err(TransportError(format!(
            "network disabled; refused contact with {url}"
        )))
    }
}
