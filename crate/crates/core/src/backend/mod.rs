//! Completion execution: one prompt in, generated text plus token usage out.
//!
//! A [`Backend`] wraps a [`CompletionProvider`] (live HTTP or scripted mock),
//! checks requests against the context limit before dispatch, retries
//! transient faults with exponential backoff, and appends one
//! [`LedgerEntry`] per successful completion.

mod http;
mod ledger;
mod mock;

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

pub use http::{completion_request_body, parse_completion_response, HttpProvider, API_KEY_ENV};
pub use ledger::{cost_of, ledger_cost, round2, CostReport, LedgerEntry, PriceSchedule, UsageLedger, UsageRecord};
pub use mock::{FnProvider, MockProvider, MockRule, MockScript};

/// Decoding temperature for tagging modes.
pub const ANNOTATION_TEMPERATURE: f64 = 0.0;
/// Decoding temperature for generation modes.
pub const GENERATION_TEMPERATURE: f64 = 0.7;
pub const DEFAULT_CONTEXT_LIMIT: u64 = 4000;
pub const MAX_STOP_SEQUENCES: usize = 4;

/// `ceil(bytes / 4)`.
pub fn estimate_tokens(text: &str) -> u64 {
    (text.len() as u64).div_ceil(4)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionRequest {
    pub prompt: String,
    pub max_tokens: u32,
    pub temperature: f64,
    #[serde(default)]
    pub stop: Vec<String>,
    #[serde(default = "one")]
    pub n: u32,
    /// Ledger tag; never sent to the provider.
    #[serde(default)]
    pub stage: String,
}

fn one() -> u32 {
    1
}

impl CompletionRequest {
    pub fn new(prompt: impl Into<String>, max_tokens: u32) -> Self {
        CompletionRequest {
            prompt: prompt.into(),
            max_tokens,
            temperature: ANNOTATION_TEMPERATURE,
            stop: Vec::new(),
            n: 1,
            stage: String::new(),
        }
    }

    pub fn temperature(mut self, t: f64) -> Self {
        self.temperature = t;
        self
    }

    pub fn stop(mut self, stop: Vec<String>) -> Self {
        self.stop = stop;
        self
    }

    pub fn stage(mut self, stage: impl Into<String>) -> Self {
        self.stage = stage.into();
        self
    }

    fn check(&self, context_limit: u64) -> Result<(), BackendError> {
        if self.prompt.is_empty() {
            return Err(BackendError::InvalidRequest("prompt is empty".into()));
        }
        if self.max_tokens == 0 {
            return Err(BackendError::InvalidRequest("max_tokens must be positive".into()));
        }
        if !self.temperature.is_finite() || self.temperature < 0.0 {
            return Err(BackendError::InvalidRequest("temperature must be a finite value >= 0".into()));
        }
        if self.stop.len() > MAX_STOP_SEQUENCES {
            return Err(BackendError::InvalidRequest(format!("at most {MAX_STOP_SEQUENCES} stop sequences")));
        }
        if self.n == 0 {
            return Err(BackendError::InvalidRequest("n must be positive".into()));
        }
        let estimated = estimate_tokens(&self.prompt);
        if estimated + u64::from(self.max_tokens) > context_limit {
            return Err(BackendError::ContextOverflow {
                estimated_prompt_tokens: estimated,
                max_tokens: self.max_tokens,
                limit: context_limit,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionResult {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub latency_ms: u64,
    pub provider_id: String,
    pub request_id: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProviderReply {
    pub text: String,
    /// Exact usage when the provider reports it.
    pub usage: Option<Usage>,
}

impl ProviderReply {
    pub fn text(text: impl Into<String>) -> Self {
        ProviderReply { text: text.into(), usage: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RequestMeta {
    pub request_id: u64,
    pub attempt: u32,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ProviderError {
    /// Transport failure, 5xx or 429: worth retrying.
    #[error("transient provider fault: {0}")]
    Transient(String),
    #[error("provider rejected the request: {0}")]
    Fatal(String),
    #[error("no credential configured (set {API_KEY_ENV})")]
    AuthMissing,
}

pub trait CompletionProvider: Send + Sync {
    fn id(&self) -> &str;
    fn complete(&self, req: &CompletionRequest, meta: RequestMeta) -> Result<ProviderReply, ProviderError>;
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum BackendError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error(
        "context overflow: ~{estimated_prompt_tokens} prompt tokens + {max_tokens} completion tokens exceeds limit {limit}"
    )]
    ContextOverflow { estimated_prompt_tokens: u64, max_tokens: u32, limit: u64 },
    #[error("provider unavailable after {attempts} attempts: {last}")]
    ProviderUnavailable { attempts: u32, last: String },
    #[error("no credential configured (set {API_KEY_ENV})")]
    AuthMissing,
    #[error("{0}")]
    Provider(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetryPolicy {
    /// Retries after the first attempt.
    pub max_retries: u32,
    pub base_delay_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { max_retries: 3, base_delay_ms: 1000 }
    }
}

impl RetryPolicy {
    /// Delay before retry `k` (0-based): base · 2^k.
    pub fn delay(&self, k: u32) -> Duration {
        Duration::from_millis(self.base_delay_ms.saturating_mul(1u64 << k.min(20)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BackendConfig {
    pub context_limit: u64,
    pub retry: RetryPolicy,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig { context_limit: DEFAULT_CONTEXT_LIMIT, retry: RetryPolicy::default() }
    }
}

type Sleeper = Arc<dyn Fn(Duration) + Send + Sync>;

/// Shareable completion executor. Clones share the provider and the ledger.
#[derive(Clone)]
pub struct Backend {
    provider: Arc<dyn CompletionProvider>,
    ledger: Arc<UsageLedger>,
    config: BackendConfig,
    sleeper: Sleeper,
}

impl std::fmt::Debug for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Backend")
            .field("provider", &self.provider.id())
            .field("config", &self.config)
            .field("ledger_entries", &self.ledger.len())
            .finish()
    }
}

impl Backend {
    pub fn new(provider: Arc<dyn CompletionProvider>) -> Self {
        Backend {
            provider,
            ledger: Arc::new(UsageLedger::new()),
            config: BackendConfig::default(),
            sleeper: Arc::new(std::thread::sleep),
        }
    }

    pub fn with_config(mut self, config: BackendConfig) -> Self {
        self.config = config;
        self
    }

    pub fn with_sleeper(mut self, sleeper: impl Fn(Duration) + Send + Sync + 'static) -> Self {
        self.sleeper = Arc::new(sleeper);
        self
    }

    /// Same provider and settings, new empty ledger.
    pub fn with_fresh_ledger(&self) -> Self {
        Backend { ledger: Arc::new(UsageLedger::new()), ..self.clone() }
    }

    pub fn ledger(&self) -> &Arc<UsageLedger> {
        &self.ledger
    }

    pub fn config(&self) -> &BackendConfig {
        &self.config
    }

    pub fn provider_id(&self) -> &str {
        self.provider.id()
    }

    pub fn complete(&self, req: &CompletionRequest) -> Result<CompletionResult, BackendError> {
        req.check(self.config.context_limit)?;
        let id = self.ledger.reserve_ids(1);
        let started = Instant::now();
        let out = self.dispatch(req, id);
        self.ledger.record_wall_time(started.elapsed());
        out
    }

    /// Results are index-aligned with `reqs`; per-item failures stay in place.
    pub fn complete_batch(
        &self,
        reqs: &[CompletionRequest],
        parallelism: usize,
    ) -> Vec<Result<CompletionResult, BackendError>> {
        if reqs.is_empty() {
            return Vec::new();
        }
        let base = self.ledger.reserve_ids(reqs.len() as u64);
        let started = Instant::now();
        let slots: Vec<Mutex<Option<Result<CompletionResult, BackendError>>>> =
            reqs.iter().map(|_| Mutex::new(None)).collect();
        let next = AtomicUsize::new(0);
        let workers = parallelism.max(1).min(reqs.len());
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    if i >= reqs.len() {
                        break;
                    }
                    let r =
                        reqs[i].check(self.config.context_limit).and_then(|_| self.dispatch(&reqs[i], base + i as u64));
                    *slots[i].lock().expect("slot poisoned") = Some(r);
                });
            }
        });
        self.ledger.record_wall_time(started.elapsed());
        slots.into_iter().map(|m| m.into_inner().expect("slot poisoned").expect("every slot is filled")).collect()
    }

    fn dispatch(&self, req: &CompletionRequest, request_id: u64) -> Result<CompletionResult, BackendError> {
        let retry = self.config.retry;
        let mut attempt = 0u32;
        loop {
            let started_at_ms = ledger::now_ms();
            let t0 = Instant::now();
            match self.provider.complete(req, RequestMeta { request_id, attempt }) {
                Ok(reply) => {
                    let latency_ms = t0.elapsed().as_millis() as u64;
                    let (prompt_tokens, completion_tokens, exact) = match reply.usage {
                        Some(u) => (u.prompt_tokens, u.completion_tokens, true),
                        None => (estimate_tokens(&req.prompt), estimate_tokens(&reply.text), false),
                    };
                    self.ledger.append(LedgerEntry {
                        request_id,
                        stage: req.stage.clone(),
                        prompt_tokens,
                        completion_tokens,
                        exact_usage: exact,
                        latency_ms,
                        started_at_ms,
                        finished_at_ms: ledger::now_ms(),
                    });
                    return Ok(CompletionResult {
                        text: reply.text,
                        prompt_tokens,
                        completion_tokens,
                        latency_ms,
                        provider_id: self.provider.id().to_string(),
                        request_id,
                    });
                }
                Err(ProviderError::Transient(msg)) => {
                    if attempt >= retry.max_retries {
                        return Err(BackendError::ProviderUnavailable { attempts: attempt + 1, last: msg });
                    }
                    (self.sleeper)(retry.delay(attempt));
                    attempt += 1;
                }
                Err(ProviderError::AuthMissing) => return Err(BackendError::AuthMissing),
                Err(ProviderError::Fatal(msg)) => return Err(BackendError::Provider(msg)),
            }
        }
    }
}
