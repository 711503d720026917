use std::path::{Path, PathBuf};
use std::sync::{Condvar, Mutex};
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json};
use thiserror::Error;

use super::prompt::Prompt;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("invalid provider configuration: {0}")]
    Config(String),
    #[error("environment variable `{0}` is not set")]
    MissingKey(String),
    #[error("authentication rejected (HTTP {0})")]
    Auth(u16),
    #[error("HTTP status {0}")]
    Status(u16),
    #[error("request timed out")]
    Timeout,
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed provider response: {0}")]
    Response(String),
    #[error("transcript {path}: {message}")]
    Transcript { path: String, message: String },
}

impl ProviderError {
    /// Failures worth another attempt.
    pub fn is_transient(&self) -> bool {
        match self {
            ProviderError::Timeout | ProviderError::Transport(_) => true,
            ProviderError::Status(code) => *code == 429 || *code >= 500,
            _ => false,
        }
    }
}

/// A text-completion backend: prompt in, response text out.
pub trait Provider: Send + Sync {
    fn complete(&self, prompt: &Prompt) -> Result<String, ProviderError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProviderKind {
    HttpChat,
    Replay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReasoningEffort {
    Minimal,
    Low,
    Medium,
    High,
}

impl ReasoningEffort {
    pub fn as_str(self) -> &'static str {
        match self {
            ReasoningEffort::Minimal => "minimal",
            ReasoningEffort::Low => "low",
            ReasoningEffort::Medium => "medium",
            ReasoningEffort::High => "high",
        }
    }
}

fn default_timeout() -> u64 {
    60
}

fn default_backoff() -> u64 {
    500
}

fn default_in_flight() -> usize {
    4
}

/// Provider settings as read from a JSON config file. The API key itself
/// is never part of the config, only the name of the variable holding it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub api_key_env: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning_effort: Option<ReasoningEffort>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
    #[serde(default)]
    pub max_retries: u32,
    #[serde(default = "default_backoff")]
    pub retry_backoff_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transcript_dir: Option<PathBuf>,
    #[serde(default = "default_in_flight")]
    pub max_in_flight: usize,
}

impl ProviderConfig {
    pub fn replay(dir: impl Into<PathBuf>) -> Self {
        Self {
            kind: ProviderKind::Replay,
            endpoint: None,
            model: None,
            api_key_env: None,
            temperature: None,
            reasoning_effort: None,
            timeout_secs: default_timeout(),
            max_retries: 0,
            retry_backoff_ms: default_backoff(),
            transcript_dir: Some(dir.into()),
            max_in_flight: default_in_flight(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self, ProviderError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| ProviderError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        let missing = |what: &str| Err(ProviderError::Config(format!("{what} is required")));
        match self.kind {
            ProviderKind::Replay => {
                if self.transcript_dir.is_none() {
                    return missing("transcript_dir");
                }
            }
            ProviderKind::HttpChat => {
                if self.endpoint.as_deref().unwrap_or("").is_empty() {
                    return missing("endpoint");
                }
                if self.api_key_env.as_deref().unwrap_or("").is_empty() {
                    return missing("api_key_env");
                }
                if self.model.as_deref().unwrap_or("").is_empty() {
                    return missing("model");
                }
            }
        }
        if self.max_in_flight == 0 {
            return Err(ProviderError::Config("max_in_flight must be positive".into()));
        }
        if let Some(t) = self.temperature {
            if !t.is_finite() || t < 0.0 {
                return Err(ProviderError::Config("temperature must be non-negative".into()));
            }
        }
        Ok(())
    }

    /// Replaces a relative transcript directory with one under `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        if let Some(dir) = &self.transcript_dir {
            if dir.is_relative() {
                self.transcript_dir = Some(base.join(dir));
            }
        }
    }
}

/// Serves canned responses from `<dir>/<problem_id>.txt`.
#[derive(Debug, Clone)]
pub struct ReplayProvider {
    dir: PathBuf,
}

impl ReplayProvider {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }
}

impl Provider for ReplayProvider {
    fn complete(&self, prompt: &Prompt) -> Result<String, ProviderError> {
        let id = prompt.problem_id.as_deref().ok_or_else(|| ProviderError::Transcript {
            path: self.dir.display().to_string(),
            message: "prompt has no problem id".into(),
        })?;
        let path = self.dir.join(format!("{id}.txt"));
        std::fs::read_to_string(&path).map_err(|e| ProviderError::Transcript {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    }
}

/// Counting semaphore bounding concurrent requests.
#[derive(Debug)]
struct Slots {
    free: Mutex<usize>,
    cv: Condvar,
}

impl Slots {
    fn acquire(&self) -> SlotGuard<'_> {
        let mut free = self.free.lock().unwrap_or_else(|e| e.into_inner());
        while *free == 0 {
            free = self.cv.wait(free).unwrap_or_else(|e| e.into_inner());
        }
        *free -= 1;
        SlotGuard(self)
    }
}

struct SlotGuard<'a>(&'a Slots);

impl Drop for SlotGuard<'_> {
    fn drop(&mut self) {
        *self.0.free.lock().unwrap_or_else(|e| e.into_inner()) += 1;
        self.0.cv.notify_one();
    }
}

/// Chat-completions style HTTP endpoint with bearer authentication.
#[derive(Debug)]
pub struct HttpProvider {
    endpoint: String,
    model: String,
    api_key_env: String,
    temperature: Option<f64>,
    reasoning_effort: Option<ReasoningEffort>,
    timeout: Duration,
    slots: Slots,
}

impl HttpProvider {
    pub fn new(cfg: &ProviderConfig) -> Result<Self, ProviderError> {
        cfg.validate()?;
        if cfg.kind != ProviderKind::HttpChat {
            return Err(ProviderError::Config("not an http_chat config".into()));
        }
        Ok(Self {
            endpoint: cfg.endpoint.clone().unwrap_or_default(),
            model: cfg.model.clone().unwrap_or_default(),
            api_key_env: cfg.api_key_env.clone().unwrap_or_default(),
            temperature: cfg.temperature,
            reasoning_effort: cfg.reasoning_effort,
            timeout: Duration::from_secs(cfg.timeout_secs),
            slots: Slots {
                free: Mutex::new(cfg.max_in_flight),
                cv: Condvar::new(),
            },
        })
    }

    /// The JSON request body. Temperature and reasoning effort are only
    /// present when configured.
    pub fn request_body(&self, prompt: &Prompt) -> Json {
        let messages: Vec<Json> = prompt
            .messages
            .iter()
            .map(|m| json!({"role": m.role.as_str(), "content": m.content}))
            .collect();
        let mut body = json!({"model": self.model, "messages": messages});
        if let Some(t) = self.temperature {
            body["temperature"] = json!(t);
        }
        if let Some(r) = self.reasoning_effort {
            body["reasoning_effort"] = json!(r.as_str());
        }
        body
    }
}

fn response_text(body: &Json) -> Result<String, ProviderError> {
    body.pointer("/choices/0/message/content")
        .and_then(Json::as_str)
        .map(str::to_string)
        .ok_or_else(|| ProviderError::Response("missing choices[0].message.content".into()))
}

impl Provider for HttpProvider {
    fn complete(&self, prompt: &Prompt) -> Result<String, ProviderError> {
        let key = std::env::var(&self.api_key_env)
            .map_err(|_| ProviderError::MissingKey(self.api_key_env.clone()))?;
        let body = self.request_body(prompt);
        let _slot = self.slots.acquire();
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(self.timeout))
            .http_status_as_error(false)
            .build();
        let agent = ureq::Agent::new_with_config(config);
        log::debug!("POST {} ({} messages)", self.endpoint, prompt.messages.len());
        let mut resp = agent
            .post(&self.endpoint)
            .header("Authorization", &format!("Bearer {key}"))
            .send_json(&body)
            .map_err(|e| match e {
                ureq::Error::Timeout(_) => ProviderError::Timeout,
                other => ProviderError::Transport(other.to_string()),
            })?;
        let status = resp.status().as_u16();
        match status {
            200..=299 => {}
            401 | 403 => return Err(ProviderError::Auth(status)),
            _ => return Err(ProviderError::Status(status)),
        }
        let json: Json = resp
            .body_mut()
            .read_json()
            .map_err(|e| ProviderError::Response(e.to_string()))?;
        response_text(&json)
    }
}

/// Re-issues transient failures up to `max_retries` extra times, doubling
/// the pause between attempts.
pub struct RetryingProvider<P> {
    inner: P,
    max_retries: u32,
    backoff: Duration,
}

impl<P: Provider> RetryingProvider<P> {
    pub fn new(inner: P, max_retries: u32, backoff: Duration) -> Self {
        Self {
            inner,
            max_retries,
            backoff,
        }
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }
}

impl<P: Provider> Provider for RetryingProvider<P> {
    fn complete(&self, prompt: &Prompt) -> Result<String, ProviderError> {
        let mut pause = self.backoff;
        let mut attempt = 0;
        loop {
            match self.inner.complete(prompt) {
                Ok(text) => return Ok(text),
                Err(e) if e.is_transient() && attempt < self.max_retries => {
                    attempt += 1;
                    log::warn!("provider attempt {attempt} failed: {e}; retrying");
                    thread::sleep(pause);
                    pause = pause.saturating_mul(2);
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// Builds the provider described by `cfg`, with retries applied.
pub fn make_provider(cfg: &ProviderConfig) -> Result<Box<dyn Provider>, ProviderError> {
    cfg.validate()?;
    let backoff = Duration::from_millis(cfg.retry_backoff_ms);
    Ok(match cfg.kind {
        ProviderKind::Replay => {
            let dir = cfg.transcript_dir.clone().unwrap_or_default();
            Box::new(ReplayProvider::new(dir))
        }
        ProviderKind::HttpChat => Box::new(RetryingProvider::new(
            HttpProvider::new(cfg)?,
            cfg.max_retries,
            backoff,
        )),
    })
}
