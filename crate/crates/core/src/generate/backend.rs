//! Chat-completion backends: an HTTP client for the de facto
//! `messages`/`choices` wire format and a deterministic fixture-backed mock.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::digest::json_digest;

use super::mock::MockBackend;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BackendError {
    #[error("request timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("authentication failed: {0}")]
    AuthFailure(String),
    #[error("rate limited after {attempts} attempt(s)")]
    RateLimited { attempts: u32 },
    #[error("server error {status} after {attempts} attempt(s)")]
    ServerError { status: u16, attempts: u32 },
    #[error("request rejected with status {status}: {body}")]
    Rejected { status: u16, body: String },
    #[error("malformed backend response: {0}")]
    MalformedBackendResponse(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("invalid backend configuration: {0}")]
    Config(String),
    #[error("injected failure for {0}")]
    Injected(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }
    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }
    pub fn assistant(content: impl Into<String>) -> Self {
        Self { role: Role::Assistant, content: content.into() }
    }
}

/// One chat-completion call. `tag` names what is being produced (a class
/// name, or `GameSpec` for extraction) and is what the mock keys on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChatRequest {
    pub tag: String,
    pub messages: Vec<ChatMessage>,
}

impl ChatRequest {
    pub fn new(tag: impl Into<String>, messages: Vec<ChatMessage>) -> Self {
        Self { tag: tag.into(), messages }
    }

    pub fn digest(&self) -> String {
        json_digest(&self.messages)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatReply {
    pub text: String,
    pub attempts: u32,
    pub latency_ms: u64,
}

pub trait ChatBackend: Send + Sync {
    /// Short label recorded in provenance, e.g. `mock` or `http_chat:model`.
    fn label(&self) -> String;
    fn complete(&self, request: &ChatRequest) -> Result<ChatReply, BackendError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    HttpChat,
    #[default]
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default)]
pub struct MockOptions {
    /// Directory of `<ClassName>.cs` fixtures overriding the built-in library.
    pub fixtures_dir: Option<PathBuf>,
    /// Tags for which the mock returns an error, for fault injection.
    pub fail_tags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub base_url: Option<String>,
    pub model: String,
    /// Name of the environment variable holding the API key. The key itself
    /// is never stored in configuration.
    pub api_key_env: Option<String>,
    pub timeout_s: u64,
    pub max_retries: u32,
    pub temperature: f32,
    pub concurrency: usize,
    /// Base delay for exponential backoff between retries.
    pub backoff_ms: u64,
    pub mock: MockOptions,
}

impl Default for BackendConfig {
    fn default() -> Self {
        Self {
            kind: BackendKind::Mock,
            base_url: None,
            model: "unity-codegen".to_string(),
            api_key_env: None,
            timeout_s: 120,
            max_retries: 3,
            temperature: 0.2,
            concurrency: 2,
            backoff_ms: 500,
            mock: MockOptions::default(),
        }
    }
}

impl BackendConfig {
    pub fn mock() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(BackendError::Config(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.concurrency == 0 {
            return Err(BackendError::Config("concurrency must be at least 1".into()));
        }
        if self.kind == BackendKind::HttpChat {
            let url = self
                .base_url
                .as_deref()
                .ok_or_else(|| BackendError::Config("http_chat requires base_url".into()))?;
            if !(url.starts_with("http://") || url.starts_with("https://")) {
                return Err(BackendError::Config(format!("base_url `{url}` is not an http(s) URL")));
            }
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Box<dyn ChatBackend>, BackendError> {
        self.validate()?;
        match self.kind {
            BackendKind::Mock => Ok(Box::new(MockBackend::from_options(&self.mock)?)),
            BackendKind::HttpChat => Ok(Box::new(HttpChatBackend::new(self.clone())?)),
        }
    }
}

pub struct HttpChatBackend {
    cfg: BackendConfig,
    agent: ureq::Agent,
    api_key: Option<String>,
    endpoint: String,
}

/// Longest server-requested wait we honor.
const MAX_RETRY_AFTER: Duration = Duration::from_secs(30);

enum Attempt {
    Done(String),
    Retry(BackendError, Option<Duration>),
    Fatal(BackendError),
}

impl HttpChatBackend {
    pub fn new(cfg: BackendConfig) -> Result<Self, BackendError> {
        cfg.validate()?;
        let api_key = match &cfg.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| {
                BackendError::AuthFailure(format!("environment variable {var} is not set"))
            })?),
            None => None,
        };
        let base = cfg.base_url.as_deref().unwrap_or_default().trim_end_matches('/');
        let endpoint = if base.ends_with("/chat/completions") {
            base.to_string()
        } else {
            format!("{base}/chat/completions")
        };
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(cfg.timeout_s.max(1))))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(Self { cfg, agent, api_key, endpoint })
    }

    fn request_body(&self, request: &ChatRequest) -> Value {
        json!({
            "model": self.cfg.model,
            "messages": request.messages,
            "temperature": self.cfg.temperature,
        })
    }

    fn attempt(&self, body: &str) -> Attempt {
        let mut req = self
            .agent
            .post(&self.endpoint)
            .header("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = match req.send(body) {
            Ok(r) => r,
            Err(ureq::Error::Timeout(_)) => return Attempt::Retry(BackendError::Timeout { attempts: 0 }, None),
            Err(e) => return Attempt::Retry(BackendError::Transport(e.to_string()), None),
        };
        let status = response.status().as_u16();
        let retry_after = response
            .headers()
            .get("retry-after")
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.trim().parse::<u64>().ok())
            .map(|s| Duration::from_secs(s).min(MAX_RETRY_AFTER));
        let text = match response.body_mut().read_to_string() {
            Ok(t) => t,
            Err(ureq::Error::Timeout(_)) => return Attempt::Retry(BackendError::Timeout { attempts: 0 }, None),
            Err(e) => return Attempt::Retry(BackendError::Transport(e.to_string()), None),
        };
        match status {
            200..=299 => match assistant_text(&text) {
                Ok(content) => Attempt::Done(content),
                Err(e) => Attempt::Fatal(e),
            },
            401 | 403 => Attempt::Fatal(BackendError::AuthFailure(format!("status {status}"))),
            408 => Attempt::Retry(BackendError::Timeout { attempts: 0 }, retry_after),
            429 => Attempt::Retry(BackendError::RateLimited { attempts: 0 }, retry_after),
            500..=599 => Attempt::Retry(BackendError::ServerError { status, attempts: 0 }, retry_after),
            _ => Attempt::Fatal(BackendError::Rejected { status, body: truncate(&text, 200) }),
        }
    }
}

impl ChatBackend for HttpChatBackend {
    fn label(&self) -> String {
        format!("http_chat:{}", self.cfg.model)
    }

    fn complete(&self, request: &ChatRequest) -> Result<ChatReply, BackendError> {
        let body = self.request_body(request).to_string();
        let started = Instant::now();
        let mut attempts = 0;
        loop {
            attempts += 1;
            match self.attempt(&body) {
                Attempt::Done(text) => {
                    return Ok(ChatReply {
                        text,
                        attempts,
                        latency_ms: started.elapsed().as_millis() as u64,
                    })
                }
                Attempt::Fatal(e) => return Err(e),
                Attempt::Retry(e, retry_after) => {
                    if attempts > self.cfg.max_retries {
                        return Err(with_attempts(e, attempts));
                    }
                    let delay = retry_after.unwrap_or_else(|| backoff_delay(self.cfg.backoff_ms, attempts));
                    tracing::debug!(attempt = attempts, error = %e, ?delay, "retrying chat request");
                    std::thread::sleep(delay);
                }
            }
        }
    }
}

/// Exponential backoff: `base * 2^(attempt-1)`, capped at 30 s.
pub fn backoff_delay(base_ms: u64, attempt: u32) -> Duration {
    let factor = 1u64 << attempt.saturating_sub(1).min(16);
    Duration::from_millis(base_ms.saturating_mul(factor)).min(Duration::from_secs(30))
}

fn with_attempts(e: BackendError, attempts: u32) -> BackendError {
    match e {
        BackendError::Timeout { .. } => BackendError::Timeout { attempts },
        BackendError::RateLimited { .. } => BackendError::RateLimited { attempts },
        BackendError::ServerError { status, .. } => BackendError::ServerError { status, attempts },
        other => other,
    }
}

fn truncate(s: &str, max: usize) -> String {
    s.chars().take(max).collect()
}

/// Extracts `choices[0].message.content` from a chat-completion response.
pub fn assistant_text(body: &str) -> Result<String, BackendError> {
    let value: Value = serde_json::from_str(body)
        .map_err(|e| BackendError::MalformedBackendResponse(format!("invalid JSON: {e}")))?;
    value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| {
            BackendError::MalformedBackendResponse("missing choices[0].message.content".into())
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_doubles() {
        assert_eq!(backoff_delay(100, 1), Duration::from_millis(100));
        assert_eq!(backoff_delay(100, 2), Duration::from_millis(200));
        assert_eq!(backoff_delay(100, 4), Duration::from_millis(800));
        assert_eq!(backoff_delay(10_000, 10), Duration::from_secs(30));
    }

    #[test]
    fn parses_assistant_text() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"hi"}}]}"#;
        assert_eq!(assistant_text(body).unwrap(), "hi");
        assert!(matches!(
            assistant_text(r#"{"choices":[]}"#),
            Err(BackendError::MalformedBackendResponse(_))
        ));
        assert!(matches!(
            assistant_text("<html>"),
            Err(BackendError::MalformedBackendResponse(_))
        ));
    }

    #[test]
    fn config_validation() {
        let mut cfg = BackendConfig::default();
        assert_eq!(cfg.temperature, 0.2);
        cfg.validate().unwrap();
        cfg.temperature = 2.5;
        assert!(cfg.validate().is_err());
        cfg.temperature = 0.0;
        cfg.kind = BackendKind::HttpChat;
        assert!(cfg.validate().is_err());
        cfg.base_url = Some("ftp://x".into());
        assert!(cfg.validate().is_err());
        cfg.base_url = Some("http://127.0.0.1:1".into());
        cfg.validate().unwrap();
    }

    #[test]
    fn missing_api_key_env_is_auth_failure() {
        let cfg = BackendConfig {
            kind: BackendKind::HttpChat,
            base_url: Some("http://127.0.0.1:1".into()),
            api_key_env: Some("GDDFORGE_TEST_SURELY_UNSET_KEY".into()),
            ..BackendConfig::default()
        };
        assert!(matches!(HttpChatBackend::new(cfg), Err(BackendError::AuthFailure(_))));
    }

    #[test]
    fn request_digest_is_stable() {
        let r = ChatRequest::new("A", vec![ChatMessage::user("x")]);
        assert_eq!(r.digest(), r.clone().digest());
        let other = ChatRequest::new("A", vec![ChatMessage::user("y")]);
        assert_ne!(r.digest(), other.digest());
    }
}
