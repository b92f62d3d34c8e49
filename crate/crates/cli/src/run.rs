//! Executes one pipeline command and writes its run directory.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use annotis::annotate::{AnnotateOptions, DefinitionCache};
use annotis::backend::{
    Backend, BackendConfig, CompletionProvider, HttpProvider, MockProvider, MockScript, UsageLedger,
};
use annotis::dataset::{self, DatasetFormat};
use annotis::dictionary::{DictionaryClient, DictionaryConfig};
use annotis::eval::{score_classification, score_spans, score_triplets, EvalReport};
use annotis::generate::{DadgPlan, GenerateOptions, GenerationRun};
use annotis::model::{AnnotatedInstance, Annotation, FewShotExample, Provenance, TaskKind, TaskSpec};
use annotis::net;
use annotis::prompt::{DisambiguationShot, Query};
use annotis::runner::Runner;
use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{self, InputFormat, LoadedConfig, Mode, Overrides, Provider};

pub const CONFIG_FILE: &str = "config.json";
pub const RUN_FILE: &str = "run.json";
pub const LEDGER_FILE: &str = "ledger.jsonl";
pub const COST_FILE: &str = "cost_report.json";
pub const TIMESTAMPS_FILE: &str = "timestamps.json";
pub const DROPPED_FILE: &str = "dropped.jsonl";
pub const EVAL_FILE: &str = "eval.json";

/// What a command produced; `partial` maps to exit status 2.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub run_dir: PathBuf,
    pub emitted: usize,
    pub dropped: usize,
    pub drop_rate: f64,
    pub partial: bool,
}

pub fn output_name(format: DatasetFormat) -> String {
    format!("output.{}", format.extension())
}

pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    std::fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut s = String::new();
    for r in rows {
        s.push_str(&serde_json::to_string(r)?);
        s.push('\n');
    }
    std::fs::write(path, s).with_context(|| format!("writing {}", path.display()))
}

/// Empties a previous run directory; refuses to touch anything else.
fn prepare_dir(dir: &Path) -> Result<()> {
    if dir.exists() {
        let mut entries = std::fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))?;
        if entries.next().is_some() {
            if !dir.join(RUN_FILE).exists() {
                bail!("{} is not empty and holds no previous run", dir.display());
            }
            std::fs::remove_dir_all(dir).with_context(|| format!("clearing {}", dir.display()))?;
        }
    }
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn provider(l: &LoadedConfig) -> Result<Arc<dyn CompletionProvider>> {
    let b = &l.config.backend;
    Ok(match b.provider {
        Provider::Mock => {
            let p = l.resolve(b.mock_script.as_ref().expect("validated"));
            let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            let script =
                MockScript::from_json(&text).map_err(|e| anyhow::anyhow!("mock script {}: {e}", p.display()))?;
            Arc::new(MockProvider::new(script).map_err(|e| anyhow::anyhow!("mock script {}: {e}", p.display()))?)
        }
        Provider::Live => {
            let mut h = HttpProvider::from_env(b.endpoint.clone().expect("validated"), b.model.clone());
            if let Some(ms) = b.timeout_ms {
                h = h.with_timeout(Duration::from_millis(ms));
            }
            Arc::new(h)
        }
    })
}

/// Builds the runner described by the backend block.
pub fn runner(l: &LoadedConfig) -> Result<Runner> {
    let b = &l.config.backend;
    let backend =
        Backend::new(provider(l)?).with_config(BackendConfig { context_limit: b.context_limit, retry: b.retry });
    let mut r = Runner::new(backend).with_parallelism(b.parallelism);
    if let Some(t) = b.temperature {
        r.annotation_temperature = t;
        r.generation_temperature = t;
    }
    r.max_tokens = b.max_tokens;
    Ok(r)
}

fn offline(l: &LoadedConfig) -> bool {
    let c = &l.config;
    let dict_ok = match (&c.dictionary, l.mode) {
        (Some(d), Mode::Dadg) => d.fixture_dir.is_some(),
        _ => true,
    };
    c.backend.provider == Provider::Mock && dict_ok
}

/// The task spec with shots loaded.
pub fn spec(l: &LoadedConfig) -> Result<TaskSpec> {
    let mut spec = l.base_spec()?;
    if let Some(p) = &l.config.task.shots {
        let p = l.resolve(p);
        let format = config::format_for(spec.kind);
        let insts = dataset::read_file(&p, format, Provenance::Gold)?;
        let shots = insts.into_iter().map(|i| FewShotExample::new(i.annotation)).collect();
        spec = spec.with_shots(shots).with_context(|| format!("task.shots {}", p.display()))?;
    }
    Ok(spec)
}

fn disambiguation_shots(l: &LoadedConfig) -> Result<Vec<DisambiguationShot>> {
    let Some(p) = &l.config.task.disambiguation_shots else { return Ok(Vec::new()) };
    let p = l.resolve(p);
    let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
    serde_json::from_str(&text).with_context(|| format!("task.disambiguation_shots {}", p.display()))
}

pub fn query_of(ann: &Annotation) -> Query {
    match ann {
        Annotation::Relation(r) => Query::relation(r.sentence.clone(), r.head.surface.clone(), r.tail.surface.clone()),
        other => Query::text(other.text()),
    }
}

/// Input items, plus the gold annotations when the input is a dataset.
fn inputs(l: &LoadedConfig, kind: TaskKind) -> Result<(Vec<Query>, Option<Vec<AnnotatedInstance>>)> {
    let p = l.resolve(l.config.io.input.as_ref().expect("validated"));
    match l.config.io.input_format {
        InputFormat::Queries => {
            let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            let mut out = Vec::new();
            for (i, line) in text.trim_start_matches('\u{feff}').lines().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                let q: Query = serde_json::from_str(line).with_context(|| format!("{} line {}", p.display(), i + 1))?;
                if kind == TaskKind::RelationExtraction && (q.head.is_none() || q.tail.is_none()) {
                    bail!("{} line {}: relation queries need head and tail", p.display(), i + 1);
                }
                out.push(q);
            }
            Ok((out, None))
        }
        InputFormat::Dataset => {
            let gold = dataset::read_file(&p, config::format_for(kind), Provenance::Gold)?;
            Ok((gold.iter().map(|g| query_of(&g.annotation)).collect(), Some(gold)))
        }
    }
}

/// Scores predictions against gold item by item; a dropped item predicts nothing.
pub fn score_against_gold(
    kind: TaskKind,
    predicted: &[Option<&Annotation>],
    gold: &[AnnotatedInstance],
) -> Result<EvalReport> {
    let r = match kind {
        TaskKind::Classification | TaskKind::RelationExtraction => {
            let label = |a: &Annotation| match a {
                Annotation::Classification { label, .. } => label.clone(),
                Annotation::Relation(r) => r.relation.clone(),
                _ => String::new(),
            };
            let p: Vec<String> = predicted.iter().map(|a| a.map(label).unwrap_or_default()).collect();
            let g: Vec<String> = gold.iter().map(|a| label(&a.annotation)).collect();
            score_classification(kind, &p, &g)?
        }
        TaskKind::Ner => {
            let spans = |a: &Annotation| match a {
                Annotation::Ner { spans, .. } => spans.clone(),
                _ => Vec::new(),
            };
            let p: Vec<_> = predicted.iter().map(|a| a.map(spans).unwrap_or_default()).collect();
            let g: Vec<_> = gold.iter().map(|a| spans(&a.annotation)).collect();
            score_spans(&p, &g)?
        }
        TaskKind::Aste => {
            let trip = |a: &Annotation| match a {
                Annotation::Aste { triplets, .. } => triplets.clone(),
                _ => Vec::new(),
            };
            let p: Vec<_> = predicted.iter().map(|a| a.map(trip).unwrap_or_default()).collect();
            let g: Vec<_> = gold.iter().map(|a| trip(&a.annotation)).collect();
            score_triplets(&p, &g)?
        }
    };
    Ok(r)
}

struct Produced {
    outputs: Vec<AnnotatedInstance>,
    dropped: usize,
    attempted: usize,
    ledger: Arc<UsageLedger>,
    summary: Value,
}

fn annotate_mode(l: &LoadedConfig, r: &Runner, spec: &TaskSpec, dir: &Path) -> Result<Produced> {
    let p = &l.config.pipeline;
    let (items, gold) = inputs(l, spec.kind)?;
    write_jsonl(&dir.join("inputs.jsonl"), &items)?;
    let mut opts = AnnotateOptions::default();
    if let Some(v) = &p.variant {
        opts = opts.variant(v.clone());
    }
    if l.mode == Mode::Pgi {
        opts = opts.pgi();
    }
    opts.disambiguation_variant = p.disambiguation_variant.clone();
    opts.disambiguation_shots = disambiguation_shots(l)?;
    let cache_path = p.definitions_cache.as_ref().map(|c| l.resolve(c));
    let mut cache = match &cache_path {
        Some(c) => DefinitionCache::load(c)?,
        None => DefinitionCache::default(),
    };
    let run = r.annotate(spec, &items, &opts, &mut cache)?;
    if spec.kind == TaskKind::Ner {
        if let Some(c) = &cache_path {
            cache.save(c)?;
        }
        write_json(&dir.join("definitions.json"), &cache)?;
    }
    write_jsonl(&dir.join(DROPPED_FILE), &run.dropped)?;

    let mut evaluated = false;
    if let (Mode::Pgi, Some(gold)) = (l.mode, &gold) {
        let mut predicted: Vec<Option<&Annotation>> = vec![None; items.len()];
        let mut kept = run.outputs.iter();
        let dropped: std::collections::BTreeSet<usize> = run.dropped.iter().map(|d| d.index).collect();
        for (i, slot) in predicted.iter_mut().enumerate() {
            if !dropped.contains(&i) {
                *slot = kept.next().map(|o| &o.annotation);
            }
        }
        if kept.next().is_some() {
            bail!("annotation outputs do not line up with the inputs");
        }
        let report = score_against_gold(spec.kind, &predicted, gold)?;
        write_json(&dir.join(EVAL_FILE), &report)?;
        evaluated = true;
    }
    let summary = json!({
        "variant": run.variant,
        "inputs": items.len(),
        "evaluated_against_gold": evaluated,
        "notes": run.notes,
    });
    Ok(Produced {
        dropped: run.dropped.len(),
        attempted: items.len(),
        outputs: run.outputs,
        ledger: run.ledger,
        summary,
    })
}

fn dictionary_client(l: &LoadedConfig) -> Result<(DictionaryClient, DadgPlan)> {
    let d = l.config.dictionary.as_ref().expect("validated");
    let mut cfg = DictionaryConfig {
        endpoint: d.endpoint.clone(),
        timeout_ms: d.timeout_ms,
        cache_dir: d.cache_dir.as_ref().map(|p| l.resolve(p)),
        fixture_dir: d.fixture_dir.as_ref().map(|p| l.resolve(p)),
        query_dir: d.query_dir.as_ref().map(|p| l.resolve(p)),
        hard_cap: d.hard_cap,
        ..DictionaryConfig::default()
    };
    if let Some(ua) = &d.user_agent {
        cfg.user_agent = ua.clone();
    }
    let client = DictionaryClient::new(cfg)?;
    let plan = DadgPlan { queries: d.queries.clone(), shared: d.shared.clone() };
    Ok((client, plan))
}

fn generate_mode(l: &LoadedConfig, r: &Runner, spec: &TaskSpec, dir: &Path) -> Result<Produced> {
    let p = &l.config.pipeline;
    let opts = GenerateOptions {
        span_variant: p.variant.clone(),
        sentence_variant: p.sentence_variant.clone(),
        opinion_variant: p.opinion_variant.clone(),
        seed: p.seed,
    };
    let run: GenerationRun = match l.mode {
        Mode::Pgdg => r.run_pgdg(spec, &p.budget, &opts)?,
        Mode::Dadg => {
            let (client, plan) = dictionary_client(l)?;
            r.run_dadg(spec, &client, &plan, &p.budget, &opts)?
        }
        _ => unreachable!("annotation modes handled elsewhere"),
    };
    write_json(&dir.join("seeds.json"), &run.seeds)?;
    write_json(&dir.join("harvests.json"), &run.harvests)?;
    write_jsonl(&dir.join(DROPPED_FILE), &run.dropped)?;
    let attempted = if spec.kind == TaskKind::Classification {
        run.outputs.len() + run.dropped.len() + run.duplicates + run.over_cap
    } else {
        run.seeds.len()
    };
    let summary = json!({
        "seeds": run.seeds.len(),
        "duplicates": run.duplicates,
        "over_cap": run.over_cap,
        "span_calls": run.harvests.iter().map(|h| h.calls).sum::<usize>(),
        "notes": run.notes,
    });
    Ok(Produced { dropped: run.dropped.len(), attempted, outputs: run.outputs, ledger: run.ledger, summary })
}

/// Runs `command` with the config at `config_path`.
pub fn execute(command: Mode, config_path: &Path, ov: &Overrides) -> Result<RunOutcome> {
    let l = config::load(config_path, command, ov)?;
    if offline(&l) {
        net::set_offline(true);
    }
    let spec = spec(&l)?;
    let r = runner(&l)?;
    let dir = l.output_dir();
    prepare_dir(&dir)?;
    write_json(&dir.join(CONFIG_FILE), &l.config)?;

    let produced = match l.mode {
        Mode::Pgda | Mode::Pgi => annotate_mode(&l, &r, &spec, &dir)?,
        Mode::Pgdg | Mode::Dadg => generate_mode(&l, &r, &spec, &dir)?,
    };

    let format = config::format_for(spec.kind);
    let mut files = vec![output_name(format)];
    dataset::write_file(&dir.join(output_name(format)), format, &produced.outputs)?;
    if let Some(ratios) = l.config.io.split {
        let (train, dev) = dataset::split(&produced.outputs, ratios, l.config.pipeline.seed)?;
        for (name, part) in [("train", &train), ("dev", &dev)] {
            let f = format!("{name}.{}", format.extension());
            dataset::write_file(&dir.join(&f), format, part)?;
            files.push(f);
        }
    }

    let b = &l.config.backend;
    let records = produced.ledger.records();
    write_jsonl(&dir.join(LEDGER_FILE), &records)?;
    let cost =
        annotis::backend::CostReport::from_ledger(&produced.ledger, &b.price, produced.outputs.len(), b.parallelism);
    write_json(
        &dir.join(COST_FILE),
        &json!({
            "num_samples": cost.num_samples,
            "cost_usd": cost.cost_usd,
            "parallelism": cost.parallelism,
            "price": b.price,
            "calls": records.len(),
            "prompt_tokens": produced.ledger.total_prompt_tokens(),
            "completion_tokens": produced.ledger.total_completion_tokens(),
        }),
    )?;
    write_json(
        &dir.join(TIMESTAMPS_FILE),
        &json!({ "wall_time_minutes": cost.wall_time_minutes, "entries": produced.ledger.entries() }),
    )?;

    let drop_rate = if produced.attempted == 0 { 0.0 } else { produced.dropped as f64 / produced.attempted as f64 };
    let partial = drop_rate > l.config.pipeline.drop_threshold;
    let approach = l.config.pipeline.label.clone().unwrap_or_else(|| l.mode.approach().to_string());
    write_json(
        &dir.join(RUN_FILE),
        &json!({
            "command": command.as_str(),
            "mode": l.mode.as_str(),
            "approach": approach,
            "task": spec.kind,
            "labels": spec.label_space.iter().collect::<Vec<_>>(),
            "format": format,
            "files": files,
            "emitted": produced.outputs.len(),
            "dropped": produced.dropped,
            "drop_rate": drop_rate,
            "drop_threshold": l.config.pipeline.drop_threshold,
            "partial": partial,
            "details": produced.summary,
            "versions": { "annotis": annotis::VERSION, "annotis-cli": env!("CARGO_PKG_VERSION") },
        }),
    )?;
    Ok(RunOutcome { run_dir: dir, emitted: produced.outputs.len(), dropped: produced.dropped, drop_rate, partial })
}
