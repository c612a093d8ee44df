//! Provider clients: the live HTTP provider, a recorded-response player
//! for offline golden-file runs, and a scripted fake for error-path tests.
//!
//! The full test suite runs with zero network; only [`HttpProvider`]
//! touches the wire.

use std::collections::VecDeque;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::Deserialize;

use crate::extraction::ExtractorConfig;
use crate::ingest::ReviewId;

/// Environment variable holding the provider API credential. Credentials
/// are never read from config files.
pub const API_KEY_ENV: &str = "SKYLENS_API_KEY";

/// One completion request. Recorded clients key their golden files by
/// `review_id`; `attempt` starts at 1 and increases across repair retries.
#[derive(Debug)]
pub struct ProviderRequest<'a> {
    pub review_id: &'a ReviewId,
    pub prompt: &'a str,
    pub attempt: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProviderError {
    /// Transient failure; the caller may retry.
    #[error("transport error: {0}")]
    Transport(String),
    /// Authentication or setup problem; retrying cannot help.
    #[error("configuration error: {0}")]
    Config(String),
}

/// A completion backend. Implementations must be shareable across the
/// batch worker threads.
pub trait ProviderClient: Sync {
    /// Identity recorded on every result this client produces, e.g. the
    /// model name or `lexicon:v1`.
    fn extractor_id(&self) -> String;

    fn complete(&self, request: &ProviderRequest<'_>) -> Result<String, ProviderError>;
}

// Wire format skylens.extract.v1 (documented in docs/formats.md):
// request  {"schema", "model", "temperature", "prompt"}
// response {"output": "<raw model text>"}
#[derive(Debug, Deserialize)]
struct WireResponse {
    output: String,
}

/// Live HTTP provider speaking the v1 wire format.
pub struct HttpProvider {
    endpoint: String,
    model: String,
    temperature: f32,
    api_key: String,
    http: reqwest::blocking::Client,
}

impl HttpProvider {
    /// Build from config, reading the credential from [`API_KEY_ENV`].
    pub fn from_env(cfg: &ExtractorConfig) -> Result<HttpProvider, ProviderError> {
        let api_key = std::env::var(API_KEY_ENV)
            .map_err(|_| ProviderError::Config(format!("{API_KEY_ENV} is not set")))?;
        if cfg.endpoint.is_empty() {
            return Err(ProviderError::Config("provider endpoint is empty".into()));
        }
        if cfg.model.is_empty() {
            return Err(ProviderError::Config("model identifier is empty".into()));
        }
        let http = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs(cfg.timeout_secs))
            .build()
            .map_err(|e| ProviderError::Config(e.to_string()))?;
        Ok(HttpProvider {
            endpoint: cfg.endpoint.clone(),
            model: cfg.model.clone(),
            temperature: cfg.temperature,
            api_key,
            http,
        })
    }
}

impl ProviderClient for HttpProvider {
    fn extractor_id(&self) -> String {
        self.model.clone()
    }

    fn complete(&self, request: &ProviderRequest<'_>) -> Result<String, ProviderError> {
        let body = serde_json::json!({
            "schema": "skylens.extract.v1",
            "model": self.model,
            "temperature": self.temperature,
            "prompt": request.prompt,
        });
        let response = self
            .http
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .json(&body)
            .send()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;

        let status = response.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(ProviderError::Config(format!(
                "provider rejected credential: {status}"
            )));
        }
        if !status.is_success() {
            return Err(ProviderError::Transport(format!(
                "provider returned {status}"
            )));
        }
        let wire: WireResponse = response
            .json()
            .map_err(|e| ProviderError::Transport(e.to_string()))?;
        Ok(wire.output)
    }
}

/// Replays golden provider responses from disk: one file per review id,
/// `<dir>/<review_id>.json`, holding the raw provider text bit-exact.
pub struct RecordedClient {
    dir: PathBuf,
}

impl RecordedClient {
    pub fn new(dir: impl Into<PathBuf>) -> RecordedClient {
        RecordedClient { dir: dir.into() }
    }

    fn golden_path(&self, id: &ReviewId) -> PathBuf {
        self.dir.join(format!("{}.json", id.as_str()))
    }
}

impl ProviderClient for RecordedClient {
    fn extractor_id(&self) -> String {
        "recorded".to_string()
    }

    fn complete(&self, request: &ProviderRequest<'_>) -> Result<String, ProviderError> {
        let path = self.golden_path(request.review_id);
        std::fs::read_to_string(&path).map_err(|e| {
            ProviderError::Config(format!("no golden response at {}: {e}", path.display()))
        })
    }
}

/// One scripted reaction of the fake client.
#[derive(Debug, Clone)]
pub enum ScriptedResponse {
    Ok(String),
    Transport(String),
    Config(String),
}

/// Deterministic fake for tests: plays back a fixed script (or one
/// repeating response), counts every request, and tracks how many were
/// in flight at once.
pub struct ScriptedClient {
    script: Mutex<VecDeque<ScriptedResponse>>,
    repeat: Option<String>,
    requests: AtomicU64,
    delay: Option<Duration>,
    in_flight: AtomicU64,
    max_in_flight: AtomicU64,
}

impl ScriptedClient {
    pub fn new(script: Vec<ScriptedResponse>) -> ScriptedClient {
        ScriptedClient {
            script: Mutex::new(script.into()),
            repeat: None,
            requests: AtomicU64::new(0),
            delay: None,
            in_flight: AtomicU64::new(0),
            max_in_flight: AtomicU64::new(0),
        }
    }

    /// Answer every request with the same raw text.
    pub fn always(raw: &str) -> ScriptedClient {
        ScriptedClient {
            script: Mutex::new(VecDeque::new()),
            repeat: Some(raw.to_string()),
            requests: AtomicU64::new(0),
            delay: None,
            in_flight: AtomicU64::new(0),
            max_in_flight: AtomicU64::new(0),
        }
    }

    /// Hold each request open for `delay`, making overlap observable.
    pub fn with_delay(mut self, delay: Duration) -> ScriptedClient {
        self.delay = Some(delay);
        self
    }

    /// Highest number of simultaneously open requests seen so far.
    pub fn max_in_flight(&self) -> u64 {
        self.max_in_flight.load(Ordering::Relaxed)
    }

    pub fn ok(raw: &str) -> ScriptedResponse {
        ScriptedResponse::Ok(raw.to_string())
    }

    pub fn transport(msg: &str) -> ScriptedResponse {
        ScriptedResponse::Transport(msg.to_string())
    }

    pub fn config(msg: &str) -> ScriptedResponse {
        ScriptedResponse::Config(msg.to_string())
    }

    /// Total requests observed so far.
    pub fn request_count(&self) -> u64 {
        self.requests.load(Ordering::Relaxed)
    }
}

impl ProviderClient for ScriptedClient {
    fn extractor_id(&self) -> String {
        "scripted".to_string()
    }

    fn complete(&self, _request: &ProviderRequest<'_>) -> Result<String, ProviderError> {
        self.requests.fetch_add(1, Ordering::Relaxed);
        let open = self.in_flight.fetch_add(1, Ordering::SeqCst) + 1;
        self.max_in_flight.fetch_max(open, Ordering::SeqCst);
        if let Some(delay) = self.delay {
            std::thread::sleep(delay);
        }
        let response = if let Some(next) = self.script.lock().unwrap().pop_front() {
            match next {
                ScriptedResponse::Ok(raw) => Ok(raw),
                ScriptedResponse::Transport(msg) => Err(ProviderError::Transport(msg)),
                ScriptedResponse::Config(msg) => Err(ProviderError::Config(msg)),
            }
        } else {
            match &self.repeat {
                Some(raw) => Ok(raw.clone()),
                None => Err(ProviderError::Config("script exhausted".to_string())),
            }
        };
        self.in_flight.fetch_sub(1, Ordering::SeqCst);
        response
    }
}
