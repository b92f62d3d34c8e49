//! The run configuration file.
//!
//! Relative paths resolve against the directory holding the config file.
//! Every error names the offending field as a dotted path.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use annotis::backend::{PriceSchedule, RetryPolicy, DEFAULT_CONTEXT_LIMIT};
use annotis::dataset::DatasetFormat;
use annotis::dictionary::{DictQuery, DEFAULT_ENDPOINT, DEFAULT_HARD_CAP};
use annotis::generate::GenerationBudget;
use annotis::model::{LabelSpace, TaskKind, TaskSpec};
use annotis::presets;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError { field: field.into(), message: message.into() }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.field.is_empty() {
            write!(f, "config: {}", self.message)
        } else {
            write!(f, "config field `{}`: {}", self.field, self.message)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Pgda,
    Pgdg,
    Dadg,
    Pgi,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Pgda => "pgda",
            Mode::Pgdg => "pgdg",
            Mode::Dadg => "dadg",
            Mode::Pgi => "pgi",
        }
    }

    /// Name printed in the report table.
    pub fn approach(self) -> &'static str {
        match self {
            Mode::Pgda => "PGDA",
            Mode::Pgdg => "PGDG",
            Mode::Dadg => "DADG",
            Mode::Pgi => "PGI",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "pgda" => Ok(Mode::Pgda),
            "pgdg" => Ok(Mode::Pgdg),
            "dadg" => Ok(Mode::Dadg),
            "pgi" => Ok(Mode::Pgi),
            _ => Err(format!("unknown mode {s:?} (pgda, pgdg, dadg, pgi)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provider {
    Live,
    Mock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    /// JSON lines of `{"text", "head"?, "tail"?}`.
    #[default]
    Queries,
    /// A dataset file of the task's format; its annotations are the gold.
    Dataset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskBlock {
    pub kind: TaskKind,
    /// Preset labels for the kind when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub definitions: BTreeMap<String, String>,
    /// Dataset file of the kind's format.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<PathBuf>,
    /// JSON list of disambiguation examples (NER).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disambiguation_shots: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<String>,
}

fn default_model() -> String {
    "text-davinci-003".into()
}

fn one() -> usize {
    1
}

fn default_context() -> u64 {
    DEFAULT_CONTEXT_LIMIT
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendBlock {
    pub provider: Provider,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mock_script: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint: Option<String>,
    #[serde(default = "default_model")]
    pub model: String,
    /// Overrides both the annotation and the generation temperature.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_tokens: Option<u32>,
    #[serde(default = "one")]
    pub parallelism: usize,
    #[serde(default)]
    pub price: PriceSchedule,
    #[serde(default = "default_context")]
    pub context_limit: u64,
    #[serde(default)]
    pub retry: RetryPolicy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timeout_ms: Option<u64>,
}

fn default_threshold() -> f64 {
    0.2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineBlock {
    /// Defaults to the command's mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    /// Template id of the main prompt (annotation or span stage).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence_variant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub opinion_variant: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disambiguation_variant: Option<String>,
    #[serde(default)]
    pub budget: GenerationBudget,
    #[serde(default)]
    pub seed: u64,
    /// Drop rate above which the run exits with status 2.
    #[serde(default = "default_threshold")]
    pub drop_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub definitions_cache: Option<PathBuf>,
    /// Row name in reports; the mode's name when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

fn default_endpoint() -> String {
    DEFAULT_ENDPOINT.into()
}

fn default_timeout() -> u64 {
    60_000
}

fn default_cap() -> usize {
    DEFAULT_HARD_CAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionaryBlock {
    #[serde(default = "default_endpoint")]
    pub endpoint: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cache_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub query_dir: Option<PathBuf>,
    #[serde(default = "default_timeout")]
    pub timeout_ms: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_agent: Option<String>,
    #[serde(default = "default_cap")]
    pub hard_cap: usize,
    /// Per-label queries (relations, entity types).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub queries: BTreeMap<String, DictQuery>,
    /// Entities shared by all labels (classification, ASTE targets).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shared: Option<DictQuery>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IoBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub input_format: InputFormat,
    pub output_dir: PathBuf,
    /// Train/dev ratios; no split when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub task: TaskBlock,
    pub backend: BackendBlock,
    pub pipeline: PipelineBlock,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dictionary: Option<DictionaryBlock>,
    pub io: IoBlock,
}

/// Command-line values that win over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub parallelism: Option<usize>,
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub output_dir: Option<PathBuf>,
}

/// A parsed, checked config plus the directory relative paths start from.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base: PathBuf,
    pub mode: Mode,
}

impl LoadedConfig {
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn output_dir(&self) -> PathBuf {
        self.resolve(&self.config.io.output_dir)
    }

    /// Task spec without shots; those are loaded by the command.
    pub fn base_spec(&self) -> Result<TaskSpec, ConfigError> {
        task_spec(&self.config.task)
    }
}

pub fn task_spec(t: &TaskBlock) -> Result<TaskSpec, ConfigError> {
    let preset = presets::for_kind(t.kind);
    let mut space = match &t.labels {
        None => preset.label_space.clone(),
        Some(ls) => LabelSpace::new(ls.iter().cloned()).map_err(|e| ConfigError::new("task.labels", e.to_string()))?,
    };
    for (k, v) in &t.definitions {
        if !space.set_definition(k, v.clone()) {
            return Err(ConfigError::new(format!("task.definitions.{k}"), "not a label of the task"));
        }
    }
    let mut spec = TaskSpec::new(t.kind, space);
    spec.domain_hint = t.domain.clone().or(preset.domain_hint);
    Ok(spec)
}

/// Parses with field paths in error messages.
pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let field = if field == "." { String::new() } else { field };
        ConfigError::new(field, e.into_inner().to_string())
    })
}

fn compatible(command: Mode, mode: Mode) -> bool {
    match command {
        Mode::Pgda => matches!(mode, Mode::Pgda | Mode::Pgi),
        Mode::Pgi => mode == Mode::Pgi,
        Mode::Pgdg => matches!(mode, Mode::Pgdg | Mode::Dadg),
        Mode::Dadg => mode == Mode::Dadg,
    }
}

pub fn load(path: &Path, command: Mode, ov: &Overrides) -> Result<LoadedConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError::new("", format!("{}: {e}", path.display())))?;
    let mut config = parse(&text)?;
    if let Some(p) = ov.parallelism {
        config.backend.parallelism = p;
    }
    if let Some(s) = ov.seed {
        config.pipeline.seed = s;
    }
    if let Some(m) = ov.mode {
        config.pipeline.mode = Some(m);
    }
    if let Some(o) = &ov.output_dir {
        config.io.output_dir = o.clone();
    }
    let mode = config.pipeline.mode.unwrap_or(command);
    if !compatible(command, mode) {
        return Err(ConfigError::new("pipeline.mode", format!("{} cannot run under this command", mode.as_str())));
    }
    config.pipeline.mode = Some(mode);
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let base = if base.as_os_str().is_empty() { PathBuf::from(".") } else { base };
    let loaded = LoadedConfig { config, base, mode };
    validate(&loaded)?;
    Ok(loaded)
}

fn must_exist(l: &LoadedConfig, field: &str, p: &Option<PathBuf>) -> Result<(), ConfigError> {
    if let Some(p) = p {
        let r = l.resolve(p);
        if !r.exists() {
            return Err(ConfigError::new(field, format!("{} does not exist", r.display())));
        }
    }
    Ok(())
}

pub fn validate(l: &LoadedConfig) -> Result<(), ConfigError> {
    let c = &l.config;
    task_spec(&c.task)?;
    must_exist(l, "task.shots", &c.task.shots)?;
    must_exist(l, "task.disambiguation_shots", &c.task.disambiguation_shots)?;
    must_exist(l, "backend.mock_script", &c.backend.mock_script)?;
    must_exist(l, "io.input", &c.io.input)?;
    if c.backend.parallelism == 0 {
        return Err(ConfigError::new("backend.parallelism", "must be at least 1"));
    }
    match c.backend.provider {
        Provider::Mock if c.backend.mock_script.is_none() => {
            return Err(ConfigError::new("backend.mock_script", "required when provider is mock"));
        }
        Provider::Live if c.backend.endpoint.is_none() => {
            return Err(ConfigError::new("backend.endpoint", "required when provider is live"));
        }
        _ => {}
    }
    if let Some(t) = c.backend.temperature {
        if !(0.0..=2.0).contains(&t) {
            return Err(ConfigError::new("backend.temperature", "must be within [0, 2]"));
        }
    }
    if c.backend.price.usd_per_1k_prompt_tokens < 0.0 || c.backend.price.usd_per_1k_completion_tokens < 0.0 {
        return Err(ConfigError::new("backend.price", "prices must be non-negative"));
    }
    if !(0.0..=1.0).contains(&c.pipeline.drop_threshold) {
        return Err(ConfigError::new("pipeline.drop_threshold", "must be within [0, 1]"));
    }
    c.pipeline.budget.validate().map_err(|e| ConfigError::new("pipeline.budget", e.to_string()))?;
    if matches!(l.mode, Mode::Pgda | Mode::Pgi) && c.io.input.is_none() {
        return Err(ConfigError::new("io.input", format!("required for {}", l.mode.as_str())));
    }
    if let Some((a, b)) = c.io.split {
        if a < 0.0 || b < 0.0 || ((a + b) - 1.0).abs() > 1e-9 {
            return Err(ConfigError::new("io.split", "ratios must be non-negative and sum to 1"));
        }
    }
    if l.mode == Mode::Dadg {
        let Some(d) = &c.dictionary else {
            return Err(ConfigError::new("dictionary", "block required for dadg"));
        };
        must_exist(l, "dictionary.fixture_dir", &d.fixture_dir)?;
        let spec = task_spec(&c.task)?;
        for (k, q) in &d.queries {
            if !spec.label_space.contains(k) {
                return Err(ConfigError::new(format!("dictionary.queries.{k}"), "not a label of the task"));
            }
            q.validate(d.hard_cap).map_err(|e| ConfigError::new(format!("dictionary.queries.{k}"), e.to_string()))?;
        }
        if let Some(q) = &d.shared {
            q.validate(d.hard_cap).map_err(|e| ConfigError::new("dictionary.shared", e.to_string()))?;
        }
        let needs_shared = matches!(c.task.kind, TaskKind::Classification | TaskKind::Aste);
        if needs_shared && d.shared.is_none() {
            return Err(ConfigError::new("dictionary.shared", format!("required for {} dadg", c.task.kind)));
        }
        if !needs_shared && d.queries.is_empty() {
            return Err(ConfigError::new(
                "dictionary.queries",
                format!("at least one query required for {} dadg", c.task.kind),
            ));
        }
    }
    Ok(())
}

/// The file format for a task kind's outputs.
pub fn format_for(kind: TaskKind) -> DatasetFormat {
    DatasetFormat::for_kind(kind)
}
