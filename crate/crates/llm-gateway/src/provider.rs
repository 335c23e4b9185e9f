//! Transport backends. The gateway owns retries, fixtures, and rate
//! limiting; a provider only turns one request into one response.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use crate::request::CompletionRequest;

/// A single-shot completion transport. Errors are transport-level strings;
/// the gateway wraps them with retry accounting.
pub trait Provider: Send + Sync {
    fn complete(&self, model: &str, request: &CompletionRequest) -> Result<String, String>;

    fn kind(&self) -> &'static str;
}

/// Wire settings for the provider-agnostic chat-completion HTTP contract.
#[derive(Debug, Clone)]
pub struct HttpProviderConfig {
    pub base_url: String,
    pub api_key: String,
    pub endpoint_path: String,
    pub auth_header: String,
    pub auth_prefix: String,
    pub timeout: Duration,
}

impl HttpProviderConfig {
    /// Reads `SKILLDEBLOAT_BASE_URL` / `SKILLDEBLOAT_API_KEY`, with
    /// standard chat-completion defaults for the rest.
    pub fn from_env() -> Result<Self, String> {
        let base_url = std::env::var("SKILLDEBLOAT_BASE_URL")
            .map_err(|_| "SKILLDEBLOAT_BASE_URL is not set".to_string())?;
        let api_key = std::env::var("SKILLDEBLOAT_API_KEY")
            .map_err(|_| "SKILLDEBLOAT_API_KEY is not set".to_string())?;
        Ok(HttpProviderConfig {
            base_url,
            api_key,
            endpoint_path: "/v1/chat/completions".into(),
            auth_header: "Authorization".into(),
            auth_prefix: "Bearer ".into(),
            timeout: Duration::from_secs(120),
        })
    }
}

/// Blocking HTTP client for any chat-completion-compatible endpoint.
pub struct HttpProvider {
    config: HttpProviderConfig,
    client: reqwest::blocking::Client,
}

impl HttpProvider {
    pub fn new(config: HttpProviderConfig) -> Result<Self, String> {
        let client = reqwest::blocking::Client::builder()
            .timeout(config.timeout)
            .build()
            .map_err(|e| format!("http client: {e}"))?;
        Ok(HttpProvider { config, client })
    }

    pub fn from_env() -> Result<Self, String> {
        Self::new(HttpProviderConfig::from_env()?)
    }
}

impl Provider for HttpProvider {
    fn complete(&self, model: &str, request: &CompletionRequest) -> Result<String, String> {
        let url = format!(
            "{}{}",
            self.config.base_url.trim_end_matches('/'),
            self.config.endpoint_path
        );
        let payload = serde_json::json!({
            "model": model,
            "messages": [
                {"role": "system", "content": request.system},
                {"role": "user", "content": request.wire_user()},
            ],
            "temperature": request.temperature,
        });
        let response = self
            .client
            .post(&url)
            .header(
                self.config.auth_header.as_str(),
                format!("{}{}", self.config.auth_prefix, self.config.api_key),
            )
            .json(&payload)
            .send()
            .map_err(|e| format!("request failed: {e}"))?;
        let status = response.status();
        let body: serde_json::Value = response
            .json()
            .map_err(|e| format!("non-JSON response ({status}): {e}"))?;
        if !status.is_success() {
            return Err(format!("HTTP {status}: {body}"));
        }
        body.pointer("/choices/0/message/content")
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .ok_or_else(|| format!("response missing choices[0].message.content: {body}"))
    }

    fn kind(&self) -> &'static str {
        "http"
    }
}

/// Test/replay double driven by a closure: gets the request and the global
/// call index, returns a response or `None` for "unscripted".
pub struct ScriptedProvider {
    script: Box<dyn Fn(&CompletionRequest, usize) -> Option<String> + Send + Sync>,
    calls: AtomicUsize,
}

impl ScriptedProvider {
    pub fn new(
        script: impl Fn(&CompletionRequest, usize) -> Option<String> + Send + Sync + 'static,
    ) -> Self {
        ScriptedProvider {
            script: Box::new(script),
            calls: AtomicUsize::new(0),
        }
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl Provider for ScriptedProvider {
    fn complete(&self, _model: &str, request: &CompletionRequest) -> Result<String, String> {
        let index = self.calls.fetch_add(1, Ordering::SeqCst);
        (self.script)(request, index).ok_or_else(|| {
            format!(
                "unscripted request (call {index}, role {}): {}",
                request.role,
                request.user.chars().take(120).collect::<String>()
            )
        })
    }

    fn kind(&self) -> &'static str {
        "scripted"
    }
}

/// Test double replying with a fixed queue of responses in order.
pub struct SequenceProvider {
    responses: Mutex<std::collections::VecDeque<Result<String, String>>>,
}

impl SequenceProvider {
    pub fn new(responses: Vec<Result<String, String>>) -> Self {
        SequenceProvider {
            responses: Mutex::new(responses.into()),
        }
    }

    pub fn of_ok(responses: &[&str]) -> Self {
        Self::new(responses.iter().map(|r| Ok(r.to_string())).collect())
    }
}

impl Provider for SequenceProvider {
    fn complete(&self, _model: &str, _request: &CompletionRequest) -> Result<String, String> {
        self.responses
            .lock()
            .expect("sequence lock")
            .pop_front()
            .unwrap_or_else(|| Err("response sequence exhausted".into()))
    }

    fn kind(&self) -> &'static str {
        "sequence"
    }
}
