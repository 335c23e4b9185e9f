//! The gateway: role→model binding, live/record/replay dispatch, transport
//! retries with exponential backoff, structured-output validation, and a
//! per-role concurrency cap.

use std::collections::HashMap;
use std::fs::File;
use std::path::PathBuf;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::GatewayError;
use crate::fixtures::{append_fixture, load_fixture_map, open_for_append};
use crate::provider::{HttpProvider, Provider};
use crate::request::{canonical_digest, CompletionRequest, Fixture, ModelRole};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Call the provider; record nothing.
    Live,
    /// Call the provider and append every exchange to the fixture store.
    Record,
    /// Serve everything from the fixture store; never touch the network.
    Replay,
}

impl std::str::FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "live" => Ok(Mode::Live),
            "record" => Ok(Mode::Record),
            "replay" => Ok(Mode::Replay),
            other => Err(format!("unknown mode {other:?} (expected live|record|replay)")),
        }
    }
}

/// Model identifier bound to each role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoleModels {
    pub compressor: String,
    pub oracle: String,
    pub evaluator: String,
    pub judge: String,
}

impl Default for RoleModels {
    fn default() -> Self {
        RoleModels {
            compressor: "compressor-model".into(),
            oracle: "oracle-model".into(),
            evaluator: "evaluator-model".into(),
            judge: "judge-model".into(),
        }
    }
}

impl RoleModels {
    /// Defaults overridden by `SKILLDEBLOAT_MODEL_<ROLE>` variables.
    pub fn from_env() -> Self {
        let mut models = RoleModels::default();
        for role in ModelRole::ALL {
            if let Ok(value) = std::env::var(role.env_var()) {
                models.set(role, value);
            }
        }
        models
    }

    pub fn get(&self, role: ModelRole) -> &str {
        match role {
            ModelRole::Compressor => &self.compressor,
            ModelRole::Oracle => &self.oracle,
            ModelRole::Evaluator => &self.evaluator,
            ModelRole::Judge => &self.judge,
        }
    }

    pub fn set(&mut self, role: ModelRole, model: String) {
        match role {
            ModelRole::Compressor => self.compressor = model,
            ModelRole::Oracle => self.oracle = model,
            ModelRole::Evaluator => self.evaluator = model,
            ModelRole::Judge => self.judge = model,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GatewayConfig {
    pub mode: Mode,
    pub fixture_path: Option<PathBuf>,
    pub models: RoleModels,
    /// Maximum in-flight requests per role.
    pub max_concurrent: usize,
    /// Transport attempts per call (exponential backoff between them).
    pub transport_attempts: u32,
    pub retry_base: Duration,
    /// Attempts for structured-output validation.
    pub parse_attempts: u32,
}

impl Default for GatewayConfig {
    fn default() -> Self {
        GatewayConfig {
            mode: Mode::Replay,
            fixture_path: None,
            models: RoleModels::default(),
            max_concurrent: 4,
            transport_attempts: 3,
            retry_base: Duration::from_secs(1),
            parse_attempts: 3,
        }
    }
}

impl GatewayConfig {
    fn validate(&self) -> Result<(), GatewayError> {
        if self.models.compressor == self.models.evaluator {
            return Err(GatewayError::InvalidConfig(format!(
                "compressor and evaluator must be distinct models (both are {:?})",
                self.models.compressor
            )));
        }
        if self.max_concurrent == 0 {
            return Err(GatewayError::InvalidConfig(
                "max_concurrent must be at least 1".into(),
            ));
        }
        if self.transport_attempts == 0 || self.parse_attempts == 0 {
            return Err(GatewayError::InvalidConfig(
                "attempt counts must be at least 1".into(),
            ));
        }
        if matches!(self.mode, Mode::Record | Mode::Replay) && self.fixture_path.is_none() {
            return Err(GatewayError::InvalidConfig(format!(
                "{:?} mode requires a fixture store path",
                self.mode
            )));
        }
        Ok(())
    }
}

struct RoleLimiter {
    max: usize,
    in_flight: Mutex<HashMap<ModelRole, usize>>,
    freed: Condvar,
}

impl RoleLimiter {
    fn acquire(&self, role: ModelRole) -> RolePermit<'_> {
        let mut counts = self.in_flight.lock().expect("limiter lock");
        while counts.get(&role).copied().unwrap_or(0) >= self.max {
            counts = self.freed.wait(counts).expect("limiter wait");
        }
        *counts.entry(role).or_insert(0) += 1;
        RolePermit {
            limiter: self,
            role,
        }
    }
}

struct RolePermit<'a> {
    limiter: &'a RoleLimiter,
    role: ModelRole,
}

impl Drop for RolePermit<'_> {
    fn drop(&mut self) {
        let mut counts = self.limiter.in_flight.lock().expect("limiter lock");
        if let Some(count) = counts.get_mut(&self.role) {
            *count = count.saturating_sub(1);
        }
        self.limiter.freed.notify_all();
    }
}

/// Shared, thread-safe entry point for every model call in the toolchain.
pub struct Gateway {
    config: GatewayConfig,
    provider: Option<Box<dyn Provider>>,
    replay_map: HashMap<String, String>,
    record_file: Option<Mutex<File>>,
    limiter: RoleLimiter,
    network_calls: AtomicUsize,
    replay_hits: AtomicUsize,
}

impl Gateway {
    /// Builds a gateway with the standard HTTP provider (live/record) or
    /// no provider at all (replay).
    pub fn new(config: GatewayConfig) -> Result<Self, GatewayError> {
        let provider: Option<Box<dyn Provider>> = match config.mode {
            Mode::Replay => None,
            Mode::Live | Mode::Record => Some(Box::new(
                HttpProvider::from_env().map_err(GatewayError::InvalidConfig)?,
            )),
        };
        Self::build(config, provider)
    }

    /// Builds a gateway around an injected provider (tests, scripted
    /// pipelines, fixture regeneration).
    pub fn with_provider(
        config: GatewayConfig,
        provider: Box<dyn Provider>,
    ) -> Result<Self, GatewayError> {
        Self::build(config, Some(provider))
    }

    fn build(
        config: GatewayConfig,
        provider: Option<Box<dyn Provider>>,
    ) -> Result<Self, GatewayError> {
        config.validate()?;
        let replay_map = match (config.mode, &config.fixture_path) {
            (Mode::Replay, Some(path)) => load_fixture_map(path)?,
            _ => HashMap::new(),
        };
        let record_file = match (config.mode, &config.fixture_path) {
            (Mode::Record, Some(path)) => Some(Mutex::new(open_for_append(path)?)),
            _ => None,
        };
        let limiter = RoleLimiter {
            max: config.max_concurrent,
            in_flight: Mutex::new(HashMap::new()),
            freed: Condvar::new(),
        };
        Ok(Gateway {
            config,
            provider,
            replay_map,
            record_file,
            limiter,
            network_calls: AtomicUsize::new(0),
            replay_hits: AtomicUsize::new(0),
        })
    }

    pub fn mode(&self) -> Mode {
        self.config.mode
    }

    /// Provider invocations so far (zero for pure replay runs).
    pub fn network_calls(&self) -> usize {
        self.network_calls.load(Ordering::SeqCst)
    }

    pub fn replay_hits(&self) -> usize {
        self.replay_hits.load(Ordering::SeqCst)
    }

    /// Resolves one request to a response under the configured mode.
    pub fn complete(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        let _permit = self.limiter.acquire(request.role);
        let digest = canonical_digest(request);
        match self.config.mode {
            Mode::Replay => match self.replay_map.get(&digest) {
                Some(response) => {
                    self.replay_hits.fetch_add(1, Ordering::SeqCst);
                    Ok(response.clone())
                }
                None => Err(GatewayError::MissingFixture {
                    digest,
                    role: request.role.to_string(),
                }),
            },
            Mode::Live => self.call_with_retries(request),
            Mode::Record => {
                let response = self.call_with_retries(request)?;
                let fixture = Fixture {
                    request_digest: digest,
                    request: request.clone(),
                    response: response.clone(),
                };
                let mut file = self
                    .record_file
                    .as_ref()
                    .expect("record mode has a store")
                    .lock()
                    .expect("record lock");
                append_fixture(&mut file, &fixture)?;
                Ok(response)
            }
        }
    }

    /// Resolves a request and strictly parses the response as `T`,
    /// re-asking up to the configured attempt count before giving up.
    pub fn complete_structured<T: DeserializeOwned>(
        &self,
        request: &CompletionRequest,
    ) -> Result<T, GatewayError> {
        let mut last_error = String::new();
        for attempt in 1..=self.config.parse_attempts {
            let response = self.complete(request)?;
            let payload = extract_json(&response);
            match serde_json::from_str::<T>(payload) {
                Ok(value) => return Ok(value),
                Err(e) => {
                    last_error = format!(
                        "attempt {attempt}: {e}; payload head: {}",
                        payload.chars().take(80).collect::<String>()
                    );
                    log::debug!(
                        "structured parse failure for role {}: {last_error}",
                        request.role
                    );
                    // Replay serves the identical bytes every time, so
                    // further attempts cannot change the outcome.
                    if self.config.mode == Mode::Replay {
                        break;
                    }
                }
            }
        }
        Err(GatewayError::FailedAfterRetries {
            attempts: self.config.parse_attempts,
            last_error,
        })
    }

    fn call_with_retries(&self, request: &CompletionRequest) -> Result<String, GatewayError> {
        let provider = self.provider.as_ref().expect("live modes have a provider");
        let model = self.config.models.get(request.role);
        let mut last_error = String::new();
        for attempt in 0..self.config.transport_attempts {
            if attempt > 0 {
                let backoff = self.config.retry_base * 2u32.pow(attempt - 1);
                std::thread::sleep(backoff);
            }
            self.network_calls.fetch_add(1, Ordering::SeqCst);
            match provider.complete(model, request) {
                Ok(response) => return Ok(response),
                Err(e) => {
                    log::warn!(
                        "{} call failed (attempt {}/{}): {e}",
                        provider.kind(),
                        attempt + 1,
                        self.config.transport_attempts
                    );
                    last_error = e;
                }
            }
        }
        Err(GatewayError::ProviderUnreachable {
            attempts: self.config.transport_attempts,
            last_error,
        })
    }
}

/// Extracts the JSON payload from a model reply: a fenced block when
/// present, otherwise the widest brace/bracket span, otherwise the trimmed
/// text itself.
pub fn extract_json(response: &str) -> &str {
    if let Some(start) = response.find("```") {
        let after = &response[start + 3..];
        let after = after.strip_prefix("json").unwrap_or(after);
        let after = after.strip_prefix('\n').unwrap_or(after);
        if let Some(end) = after.find("```") {
            return after[..end].trim();
        }
    }
    let trimmed = response.trim();
    for (open, close) in [('{', '}'), ('[', ']')] {
        if let (Some(start), Some(end)) = (trimmed.find(open), trimmed.rfind(close)) {
            if start < end {
                return trimmed[start..=end].trim();
            }
        }
    }
    trimmed
}
