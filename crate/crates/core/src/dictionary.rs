//! Wikidata as a span source for dictionary-assisted generation.
//!
//! Two parameterized SPARQL queries: head/tail label pairs linked by a
//! property, and labels of items that are instances (or subclass instances)
//! of a class. Results are cached one JSON file per query key. Fixture mode
//! reads canned SPARQL JSON responses from a directory and never touches the
//! network.

use std::collections::{BTreeSet, HashMap};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::net::{HttpRequest, HttpTransport, Method, TransportError, UreqTransport};

pub const DEFAULT_ENDPOINT: &str = "https://query.wikidata.org/sparql";
pub const DEFAULT_HARD_CAP: usize = 10_000;
pub const PAIRS_TEMPLATE: &str = include_str!("../queries/pairs.rq");
pub const ENTITIES_TEMPLATE: &str = include_str!("../queries/entities.rq");

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum DictError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("dictionary endpoint unavailable: {0}")]
    EndpointUnavailable(String),
    #[error("dictionary query timed out")]
    QueryTimeout,
    #[error("malformed dictionary response: {0}")]
    MalformedResponse(String),
    #[error("no fixture for {0}")]
    FixtureMissing(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    Pairs,
    Entities,
}

impl QueryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            QueryKind::Pairs => "pairs",
            QueryKind::Entities => "entities",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DictValue {
    Pair { head: String, tail: String },
    Entity { label: String, type_tag: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DictionaryEntry {
    #[serde(flatten)]
    pub value: DictValue,
    pub source_id: String,
    /// Unix seconds; 0 for fixture data.
    pub retrieved_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DictQuery {
    pub source_id: String,
    pub limit: usize,
    #[serde(default = "default_language")]
    pub language: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_filter: Option<String>,
}

fn default_language() -> String {
    "en".into()
}

/// Letter followed by digits, e.g. `P6` or `Q5`.
pub fn is_identifier(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic()) && {
        let rest = c.as_str();
        !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit())
    }
}

impl DictQuery {
    pub fn new(source_id: impl Into<String>, limit: usize) -> Self {
        DictQuery { source_id: source_id.into(), limit, language: default_language(), domain_filter: None }
    }

    pub fn with_domain(mut self, class: impl Into<String>) -> Self {
        self.domain_filter = Some(class.into());
        self
    }

    pub fn validate(&self, hard_cap: usize) -> Result<(), DictError> {
        if !is_identifier(&self.source_id) {
            return Err(DictError::InvalidQuery(format!("bad identifier {:?}", self.source_id)));
        }
        if let Some(d) = &self.domain_filter {
            if !is_identifier(d) {
                return Err(DictError::InvalidQuery(format!("bad domain identifier {d:?}")));
            }
        }
        if self.limit == 0 || self.limit > hard_cap {
            return Err(DictError::InvalidQuery(format!("limit {} outside 1..={hard_cap}", self.limit)));
        }
        if self.language.is_empty() || !self.language.chars().all(|c| c.is_ascii_alphanumeric() || c == '-') {
            return Err(DictError::InvalidQuery(format!("bad language tag {:?}", self.language)));
        }
        Ok(())
    }
}

fn sha_hex(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

/// Fixture file stem: ignores `limit`, which is applied after loading.
pub fn fixture_key(kind: QueryKind, q: &DictQuery) -> String {
    let raw =
        format!("{}\n{}\n{}\n{}", kind.as_str(), q.source_id, q.language, q.domain_filter.as_deref().unwrap_or(""));
    sha_hex(&raw)[..16].to_string()
}

fn cache_key(kind: QueryKind, q: &DictQuery) -> String {
    let raw = format!(
        "{}\n{}\n{}\n{}\n{}",
        kind.as_str(),
        q.source_id,
        q.limit,
        q.language,
        q.domain_filter.as_deref().unwrap_or("")
    );
    sha_hex(&raw)[..24].to_string()
}

/// Query text for `kind` from `template`.
pub fn render_query(template: &str, kind: QueryKind, q: &DictQuery) -> String {
    let domain_clause = match &q.domain_filter {
        Some(d) => format!("?item (wdt:P1269|wdt:P361|wdt:P101) wd:{d} ."),
        None => String::new(),
    };
    let slot = match kind {
        QueryKind::Pairs => "{property}",
        QueryKind::Entities => "{class}",
    };
    template
        .replace(slot, &q.source_id)
        .replace("{domain_clause}", &domain_clause)
        .replace("{language}", &q.language)
        .replace("{limit}", &q.limit.to_string())
}

fn binding<'a>(row: &'a Value, var: &str) -> Option<&'a str> {
    row.get(var)?.get("value")?.as_str()
}

fn bindings(body: &str) -> Result<Vec<Value>, DictError> {
    let v: Value = serde_json::from_str(body).map_err(|e| DictError::MalformedResponse(e.to_string()))?;
    v.get("results")
        .and_then(|r| r.get("bindings"))
        .and_then(Value::as_array)
        .cloned()
        .ok_or_else(|| DictError::MalformedResponse("missing results.bindings".into()))
}

/// The label service falls back to the bare item id when a label is missing.
fn usable(label: &str) -> Option<String> {
    let l = label.trim();
    let bare_id = l.len() > 1 && l.starts_with('Q') && l[1..].bytes().all(|b| b.is_ascii_digit());
    (!l.is_empty() && !bare_id).then(|| l.to_string())
}

fn fold(s: &str) -> String {
    s.chars().flat_map(char::to_lowercase).collect()
}

/// `(head, tail)` rows of a SPARQL JSON response, trimmed and deduped
/// case-insensitively, response order kept.
pub fn parse_pairs_response(body: &str) -> Result<Vec<(String, String)>, DictError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for row in bindings(body)? {
        let (Some(h), Some(t)) = (binding(&row, "headLabel"), binding(&row, "tailLabel")) else { continue };
        let (Some(h), Some(t)) = (usable(h), usable(t)) else { continue };
        if seen.insert((fold(&h), fold(&t))) {
            out.push((h, t));
        }
    }
    Ok(out)
}

/// Item labels of a SPARQL JSON response, trimmed and deduped case-insensitively.
pub fn parse_entities_response(body: &str) -> Result<Vec<String>, DictError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for row in bindings(body)? {
        let Some(l) = binding(&row, "itemLabel").and_then(usable) else { continue };
        if seen.insert(fold(&l)) {
            out.push(l);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DictionaryConfig {
    pub endpoint: String,
    pub timeout_ms: u64,
    pub user_agent: String,
    pub cache_dir: Option<PathBuf>,
    /// Fixture mode when set.
    pub fixture_dir: Option<PathBuf>,
    /// Directory holding `pairs.rq` / `entities.rq` overrides.
    pub query_dir: Option<PathBuf>,
    pub hard_cap: usize,
}

impl Default for DictionaryConfig {
    fn default() -> Self {
        DictionaryConfig {
            endpoint: DEFAULT_ENDPOINT.into(),
            timeout_ms: 60_000,
            user_agent: concat!("annotis/", env!("CARGO_PKG_VERSION")).into(),
            cache_dir: None,
            fixture_dir: None,
            query_dir: None,
            hard_cap: DEFAULT_HARD_CAP,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    kind: QueryKind,
    query: DictQuery,
    entries: Vec<DictionaryEntry>,
}

pub struct DictionaryClient {
    config: DictionaryConfig,
    pairs_template: String,
    entities_template: String,
    transport: Arc<dyn HttpTransport>,
    network_calls: AtomicUsize,
    memory: Mutex<HashMap<String, Vec<DictionaryEntry>>>,
    in_flight: Mutex<HashMap<String, Arc<Mutex<()>>>>,
}

impl std::fmt::Debug for DictionaryClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DictionaryClient").field("config", &self.config).finish()
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> DictError {
    DictError::Io { path: path.display().to_string(), message: e.to_string() }
}

impl DictionaryClient {
    pub fn new(config: DictionaryConfig) -> Result<Self, DictError> {
        let load = |name: &str, fallback: &str| -> Result<String, DictError> {
            match &config.query_dir {
                Some(dir) => {
                    let p = dir.join(name);
                    if p.exists() {
                        std::fs::read_to_string(&p).map_err(|e| io_err(&p, e))
                    } else {
                        Ok(fallback.to_string())
                    }
                }
                None => Ok(fallback.to_string()),
            }
        };
        let pairs_template = load("pairs.rq", PAIRS_TEMPLATE)?;
        let entities_template = load("entities.rq", ENTITIES_TEMPLATE)?;
        let transport = Arc::new(UreqTransport::with_user_agent(config.user_agent.clone()));
        Ok(DictionaryClient {
            config,
            pairs_template,
            entities_template,
            transport,
            network_calls: AtomicUsize::new(0),
            memory: Mutex::new(HashMap::new()),
            in_flight: Mutex::new(HashMap::new()),
        })
    }

    pub fn fixtures(dir: impl Into<PathBuf>) -> Self {
        DictionaryClient::new(DictionaryConfig { fixture_dir: Some(dir.into()), ..Default::default() })
            .expect("built-in query templates")
    }

    pub fn with_transport(mut self, transport: Arc<dyn HttpTransport>) -> Self {
        self.transport = transport;
        self
    }

    pub fn config(&self) -> &DictionaryConfig {
        &self.config
    }

    /// Requests sent to the endpoint by this client.
    pub fn network_calls(&self) -> usize {
        self.network_calls.load(Ordering::SeqCst)
    }

    pub fn query_text(&self, kind: QueryKind, q: &DictQuery) -> String {
        let t = match kind {
            QueryKind::Pairs => &self.pairs_template,
            QueryKind::Entities => &self.entities_template,
        };
        render_query(t, kind, q)
    }

    /// Where fixture mode looks for the response to `q`.
    pub fn fixture_path(&self, kind: QueryKind, q: &DictQuery) -> Option<PathBuf> {
        self.config.fixture_dir.as_ref().map(|d| d.join(format!("{}.json", fixture_key(kind, q))))
    }

    pub fn fetch_pairs(&self, q: &DictQuery) -> Result<Vec<DictionaryEntry>, DictError> {
        self.fetch(QueryKind::Pairs, q)
    }

    pub fn fetch_entities(&self, q: &DictQuery) -> Result<Vec<DictionaryEntry>, DictError> {
        self.fetch(QueryKind::Entities, q)
    }

    fn fetch(&self, kind: QueryKind, q: &DictQuery) -> Result<Vec<DictionaryEntry>, DictError> {
        q.validate(self.config.hard_cap)?;
        let key = cache_key(kind, q);
        let gate = {
            let mut m = self.in_flight.lock().expect("in-flight map poisoned");
            m.entry(key.clone()).or_default().clone()
        };
        let _held = gate.lock().expect("key lock poisoned");
        if let Some(hit) = self.memory.lock().expect("memory cache poisoned").get(&key) {
            return Ok(hit.clone());
        }
        if let Some(hit) = self.load_cached(&key)? {
            self.memory.lock().expect("memory cache poisoned").insert(key, hit.clone());
            return Ok(hit);
        }
        let (body, retrieved_at) = match self.fixture_path(kind, q) {
            Some(p) => match std::fs::read_to_string(&p) {
                Ok(b) => (b, 0),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                    return Err(DictError::FixtureMissing(format!(
                        "{} {} ({})",
                        kind.as_str(),
                        q.source_id,
                        p.display()
                    )))
                }
                Err(e) => return Err(io_err(&p, e)),
            },
            None => (self.query_endpoint(&self.query_text(kind, q))?, now_secs()),
        };
        let entries = to_entries(kind, q, &body, retrieved_at)?;
        self.store_cached(&key, kind, q, &entries)?;
        self.memory.lock().expect("memory cache poisoned").insert(key, entries.clone());
        Ok(entries)
    }

    fn query_endpoint(&self, sparql: &str) -> Result<String, DictError> {
        self.network_calls.fetch_add(1, Ordering::SeqCst);
        let req = HttpRequest {
            method: Method::Get,
            url: self.config.endpoint.clone(),
            headers: vec![("Accept".into(), "application/sparql-results+json".into())],
            query: vec![("query".into(), sparql.to_string()), ("format".into(), "json".into())],
            body: None,
            timeout: Duration::from_millis(self.config.timeout_ms),
        };
        match self.transport.send(&req) {
            Ok(r) if (200..300).contains(&r.status) => Ok(r.body),
            Ok(r) => Err(DictError::EndpointUnavailable(format!("HTTP {}", r.status))),
            Err(TransportError::Timeout) => Err(DictError::QueryTimeout),
            Err(e) => Err(DictError::EndpointUnavailable(e.to_string())),
        }
    }

    fn cache_path(&self, key: &str) -> Option<PathBuf> {
        self.config.cache_dir.as_ref().map(|d| d.join(format!("{key}.json")))
    }

    fn load_cached(&self, key: &str) -> Result<Option<Vec<DictionaryEntry>>, DictError> {
        let Some(p) = self.cache_path(key) else { return Ok(None) };
        match std::fs::read_to_string(&p) {
            Ok(s) => {
                let f: CacheFile = serde_json::from_str(&s).map_err(|e| io_err(&p, e))?;
                Ok(Some(f.entries))
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(io_err(&p, e)),
        }
    }

    fn store_cached(
        &self,
        key: &str,
        kind: QueryKind,
        q: &DictQuery,
        entries: &[DictionaryEntry],
    ) -> Result<(), DictError> {
        let Some(p) = self.cache_path(key) else { return Ok(()) };
        if let Some(dir) = p.parent() {
            std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        }
        let body = serde_json::to_string_pretty(&CacheFile { kind, query: q.clone(), entries: entries.to_vec() })
            .map_err(|e| io_err(&p, e))?;
        let tmp = p.with_extension("json.tmp");
        std::fs::write(&tmp, body + "\n").map_err(|e| io_err(&tmp, e))?;
        std::fs::rename(&tmp, &p).map_err(|e| io_err(&p, e))
    }
}

fn now_secs() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

fn to_entries(
    kind: QueryKind,
    q: &DictQuery,
    body: &str,
    retrieved_at: u64,
) -> Result<Vec<DictionaryEntry>, DictError> {
    let entry = |value| DictionaryEntry { value, source_id: q.source_id.clone(), retrieved_at };
    Ok(match kind {
        QueryKind::Pairs => parse_pairs_response(body)?
            .into_iter()
            .take(q.limit)
            .map(|(head, tail)| entry(DictValue::Pair { head, tail }))
            .collect(),
        QueryKind::Entities => parse_entities_response(body)?
            .into_iter()
            .take(q.limit)
            .map(|label| entry(DictValue::Entity { label, type_tag: q.source_id.clone() }))
            .collect(),
    })
}

/// Renders rows as a SPARQL JSON response body, for writing fixtures.
pub fn response_body(kind: QueryKind, rows: &[Vec<&str>]) -> String {
    let vars: &[&str] = match kind {
        QueryKind::Pairs => &["headLabel", "tailLabel"],
        QueryKind::Entities => &["itemLabel"],
    };
    let bindings: Vec<Value> = rows
        .iter()
        .map(|r| {
            let m: serde_json::Map<String, Value> = vars
                .iter()
                .zip(r)
                .map(|(v, x)| (v.to_string(), serde_json::json!({"type": "literal", "xml:lang": "en", "value": x})))
                .collect();
            Value::Object(m)
        })
        .collect();
    serde_json::json!({"head": {"vars": vars}, "results": {"bindings": bindings}}).to_string()
}
