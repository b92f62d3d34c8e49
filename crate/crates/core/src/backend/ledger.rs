use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSchedule {
    pub model_name: String,
    pub usd_per_1k_prompt_tokens: f64,
    pub usd_per_1k_completion_tokens: f64,
}

impl PriceSchedule {
    pub fn new(model_name: impl Into<String>, prompt: f64, completion: f64) -> Self {
        PriceSchedule {
            model_name: model_name.into(),
            usd_per_1k_prompt_tokens: prompt.max(0.0),
            usd_per_1k_completion_tokens: completion.max(0.0),
        }
    }

    pub fn entry_cost(&self, prompt_tokens: u64, completion_tokens: u64) -> f64 {
        prompt_tokens as f64 / 1000.0 * self.usd_per_1k_prompt_tokens
            + completion_tokens as f64 / 1000.0 * self.usd_per_1k_completion_tokens
    }
}

impl Default for PriceSchedule {
    fn default() -> Self {
        PriceSchedule::new("text-davinci-003", 0.02, 0.02)
    }
}

/// One billed completion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub request_id: u64,
    /// Pipeline stage that issued the call (e.g. `type-pass`, `disambiguation`).
    pub stage: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    /// Token counts came from the provider rather than the byte heuristic.
    pub exact_usage: bool,
    pub latency_ms: u64,
    pub started_at_ms: u64,
    pub finished_at_ms: u64,
}

/// Ledger entry without any timing fields; equal across reruns of a deterministic mock.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct UsageRecord {
    pub request_id: u64,
    pub stage: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

impl From<&LedgerEntry> for UsageRecord {
    fn from(e: &LedgerEntry) -> Self {
        UsageRecord {
            request_id: e.request_id,
            stage: e.stage.clone(),
            prompt_tokens: e.prompt_tokens,
            completion_tokens: e.completion_tokens,
        }
    }
}

pub(crate) fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

/// Append-only usage record shared by concurrent workers.
#[derive(Debug, Default)]
pub struct UsageLedger {
    next_id: AtomicU64,
    entries: Mutex<Vec<LedgerEntry>>,
    wall: Mutex<Vec<Duration>>,
}

impl UsageLedger {
    pub fn new() -> Self {
        UsageLedger::default()
    }

    /// Reserves `n` consecutive request ids and returns the first.
    pub fn reserve_ids(&self, n: u64) -> u64 {
        self.next_id.fetch_add(n, Ordering::SeqCst)
    }

    pub fn append(&self, entry: LedgerEntry) {
        self.entries.lock().expect("ledger poisoned").push(entry);
    }

    pub fn record_wall_time(&self, d: Duration) {
        self.wall.lock().expect("ledger poisoned").push(d);
    }

    pub fn entries(&self) -> Vec<LedgerEntry> {
        self.entries.lock().expect("ledger poisoned").clone()
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("ledger poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries sorted by request id with timing stripped.
    pub fn records(&self) -> Vec<UsageRecord> {
        let mut r: Vec<UsageRecord> = self.entries().iter().map(UsageRecord::from).collect();
        r.sort();
        r
    }

    pub fn count_stage(&self, stage: &str) -> usize {
        self.entries.lock().expect("ledger poisoned").iter().filter(|e| e.stage == stage).count()
    }

    pub fn total_prompt_tokens(&self) -> u64 {
        self.entries().iter().map(|e| e.prompt_tokens).sum()
    }

    pub fn total_completion_tokens(&self) -> u64 {
        self.entries().iter().map(|e| e.completion_tokens).sum()
    }

    pub fn wall_time(&self) -> Duration {
        self.wall.lock().expect("ledger poisoned").iter().sum()
    }
}

/// Σ (prompt/1000 · prompt price + completion/1000 · completion price).
pub fn cost_of<'a, I>(entries: I, schedule: &PriceSchedule) -> f64
where
    I: IntoIterator<Item = &'a UsageRecord>,
{
    entries.into_iter().map(|e| schedule.entry_cost(e.prompt_tokens, e.completion_tokens)).sum()
}

pub fn ledger_cost(ledger: &UsageLedger, schedule: &PriceSchedule) -> f64 {
    cost_of(&ledger.records(), schedule)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub num_samples: usize,
    pub cost_usd: f64,
    pub wall_time_minutes: f64,
    pub parallelism: usize,
}

impl CostReport {
    pub fn from_ledger(ledger: &UsageLedger, schedule: &PriceSchedule, num_samples: usize, parallelism: usize) -> Self {
        CostReport {
            num_samples,
            cost_usd: ledger_cost(ledger, schedule),
            wall_time_minutes: round2(ledger.wall_time().as_secs_f64() / 60.0),
            parallelism,
        }
    }
}

pub fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}
