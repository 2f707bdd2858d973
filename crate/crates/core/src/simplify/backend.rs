//! Simplifier backends and their client-side pacing.

use std::fmt;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::mock::mock_simplify;
use crate::error::{BackendError, SimplifyError};

pub const ENV_API_KEY: &str = "PRECISE_API_KEY";
pub const ENV_API_URL: &str = "PRECISE_API_URL";
pub const ENV_MODEL: &str = "PRECISE_MODEL";

pub const MOCK_MODEL_ID: &str = "mock";

/// Everything a backend may look at for one report.
#[derive(Debug, Clone, Copy)]
pub struct GenerationRequest<'a> {
    pub report_id: &'a str,
    pub prompt: &'a str,
    pub report_text: &'a str,
}

/// A text generator. Implementations must be callable from several threads.
pub trait Backend: Send + Sync {
    fn backend_id(&self) -> &str;
    fn model_id(&self) -> &str;
    fn generate(&self, request: &GenerationRequest<'_>) -> Result<String, BackendError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    HttpChat,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub timeout_secs: f64,
    pub max_retries: u32,
    /// Base of the exponential backoff between retries.
    pub retry_backoff_secs: f64,
    /// Client-side rate cap; `None` means unpaced.
    pub requests_per_minute: Option<f64>,
    pub temperature: f64,
    /// Maximum in-flight requests during a batch.
    pub concurrency: usize,
}

impl BackendConfig {
    pub fn mock() -> Self {
        Self {
            kind: BackendKind::Mock,
            endpoint: None,
            model: None,
            timeout_secs: 60.0,
            max_retries: 3,
            retry_backoff_secs: 1.0,
            requests_per_minute: None,
            temperature: 0.0,
            concurrency: 4,
        }
    }

    pub fn http(endpoint: impl Into<String>, model: impl Into<String>) -> Self {
        Self {
            kind: BackendKind::HttpChat,
            endpoint: Some(endpoint.into()),
            model: Some(model.into()),
            requests_per_minute: Some(60.0),
            concurrency: 2,
            ..Self::mock()
        }
    }

    /// An http-chat configuration from `PRECISE_API_URL` and `PRECISE_MODEL`.
    pub fn http_from_env() -> Result<Self, SimplifyError> {
        let var = |name: &str| std::env::var(name).map_err(|_| SimplifyError::Config(format!("{name} is not set")));
        Ok(Self::http(var(ENV_API_URL)?, var(ENV_MODEL)?))
    }

    pub fn validate(&self) -> Result<(), SimplifyError> {
        let bad = |msg: &str| Err(SimplifyError::Config(msg.to_string()));
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return bad("timeout must be positive");
        }
        if !(self.retry_backoff_secs >= 0.0 && self.retry_backoff_secs.is_finite()) {
            return bad("retry backoff must be non-negative");
        }
        if let Some(rpm) = self.requests_per_minute {
            if !(rpm > 0.0 && rpm.is_finite()) {
                return bad("requests per minute must be positive");
            }
        }
        if self.concurrency == 0 {
            return bad("concurrency must be at least 1");
        }
        if self.kind == BackendKind::HttpChat && (self.endpoint.is_none() || self.model.is_none()) {
            return bad("http-chat needs an endpoint and a model");
        }
        Ok(())
    }

    /// Builds the configured backend. `api_key` is only consulted for http-chat.
    pub fn build(&self, api_key: Option<String>) -> Result<Box<dyn Backend>, SimplifyError> {
        self.validate()?;
        match self.kind {
            BackendKind::Mock => Ok(Box::new(MockBackend)),
            BackendKind::HttpChat => {
                let key = api_key.ok_or_else(|| SimplifyError::Config(format!("{ENV_API_KEY} is not set")))?;
                Ok(Box::new(HttpBackend::new(self, key)?))
            }
        }
    }
}

/// The offline rule-based rewriter. Pure and reentrant.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockBackend;

impl Backend for MockBackend {
    fn backend_id(&self) -> &str {
        "mock"
    }

    fn model_id(&self) -> &str {
        MOCK_MODEL_ID
    }

    fn generate(&self, request: &GenerationRequest<'_>) -> Result<String, BackendError> {
        mock_simplify(request.report_text).map_err(|e| BackendError::Fatal(e.to_string()))
    }
}

/// Chat-completions client: the prompt is the sole user message.
pub struct HttpBackend {
    agent: ureq::Agent,
    endpoint: String,
    model: String,
    temperature: f64,
    api_key: String,
}

impl fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HttpBackend")
            .field("endpoint", &self.endpoint)
            .field("model", &self.model)
            .field("temperature", &self.temperature)
            .field("api_key", &"<redacted>")
            .finish()
    }
}

impl HttpBackend {
    pub fn new(config: &BackendConfig, api_key: String) -> Result<Self, SimplifyError> {
        let endpoint = config.endpoint.clone().ok_or_else(|| SimplifyError::Config("missing endpoint".into()))?;
        let model = config.model.clone().ok_or_else(|| SimplifyError::Config("missing model".into()))?;
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self { agent, endpoint, model, temperature: config.temperature, api_key })
    }

    pub fn request_body(&self, prompt: &str) -> Value {
        json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.temperature,
        })
    }
}

impl Backend for HttpBackend {
    fn backend_id(&self) -> &str {
        "http-chat"
    }

    fn model_id(&self) -> &str {
        &self.model
    }

    fn generate(&self, request: &GenerationRequest<'_>) -> Result<String, BackendError> {
        let mut response = self
            .agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(self.request_body(request.prompt))
            .map_err(|e| BackendError::Transient(e.to_string()))?;

        let status = response.status().as_u16();
        if status == 429 || status >= 500 {
            return Err(BackendError::Transient(format!("HTTP {status}")));
        }
        if !(200..300).contains(&status) {
            return Err(BackendError::Fatal(format!("HTTP {status}")));
        }
        let body: Value = response
            .body_mut()
            .read_json()
            .map_err(|e| BackendError::Fatal(format!("unreadable response body: {e}")))?;
        body.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| BackendError::Fatal("response has no choices[0].message.content".into()))
    }
}

/// Token bucket of capacity one: successive acquisitions are spaced at
/// least `interval` apart, across all threads sharing the limiter.
#[derive(Debug)]
pub struct RateLimiter {
    interval: Duration,
    next_free: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn per_minute(rpm: Option<f64>) -> Self {
        let interval = rpm.map_or(Duration::ZERO, |r| Duration::from_secs_f64(60.0 / r));
        Self { interval, next_free: Mutex::new(None) }
    }

    pub fn interval(&self) -> Duration {
        self.interval
    }

    /// Blocks until a token is available.
    pub fn acquire(&self) {
        if self.interval.is_zero() {
            return;
        }
        let mut next = self.next_free.lock().unwrap_or_else(|p| p.into_inner());
        let now = Instant::now();
        let slot = match *next {
            Some(t) if t > now => {
                std::thread::sleep(t - now);
                t
            }
            _ => now,
        };
        *next = Some(slot + self.interval);
    }
}
