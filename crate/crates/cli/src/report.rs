//! `evaluate` and `report`.

use std::path::{Path, PathBuf};

use annotis::backend::{cost_of, PriceSchedule, UsageRecord};
use annotis::dataset::{self, DatasetFormat};
use annotis::eval::{self, metric_columns, metric_values, render_table, EvalReport, ReportRow};
use annotis::model::{AnnotatedInstance, Provenance, TaskKind};
use annotis::presets;
use anyhow::{bail, Context, Result};
use serde::Deserialize;

use crate::run::{output_name, write_json, CONFIG_FILE, EVAL_FILE, LEDGER_FILE, RUN_FILE, TIMESTAMPS_FILE};

#[derive(Debug, Deserialize)]
struct RunSummary {
    approach: String,
    task: TaskKind,
    emitted: usize,
    #[serde(default)]
    labels: Vec<String>,
    #[serde(default)]
    files: Vec<String>,
}

#[derive(Debug, Deserialize)]
struct Timestamps {
    wall_time_minutes: f64,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_summary(dir: &Path) -> Result<RunSummary> {
    read_json(&dir.join(RUN_FILE)).with_context(|| format!("{} is not a run directory", dir.display()))
}

pub fn read_ledger(path: &Path) -> Result<Vec<UsageRecord>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| serde_json::from_str(l).with_context(|| format!("{} line {}", path.display(), i + 1)))
        .collect()
}

/// The price schedule recorded in a run's config snapshot.
fn price_of(dir: &Path) -> Result<PriceSchedule> {
    let p = dir.join(CONFIG_FILE);
    let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
    let cfg = crate::config::parse(&text).with_context(|| p.display().to_string())?;
    Ok(cfg.backend.price)
}

fn label_order(kind: TaskKind, labels: &[String]) -> Vec<String> {
    if labels.is_empty() {
        presets::for_kind(kind).label_space.iter().map(str::to_string).collect()
    } else {
        labels.to_vec()
    }
}

pub struct EvaluateArgs {
    pub train: Option<PathBuf>,
    pub test: PathBuf,
    pub task: Option<TaskKind>,
    pub format: Option<DatasetFormat>,
    pub run_dir: Option<PathBuf>,
}

/// Trains the proxy on `train` (or the run's training data) and scores `test`.
/// With a run directory the report is also stored there.
pub fn evaluate(a: &EvaluateArgs) -> Result<EvalReport> {
    let summary = a.run_dir.as_deref().map(read_summary).transpose()?;
    let kind = match (a.task, &summary) {
        (Some(k), Some(s)) if k != s.task => bail!("--task {k} does not match the run's task {}", s.task),
        (Some(k), _) => k,
        (None, Some(s)) => s.task,
        (None, None) => bail!("--task is required without --run-dir"),
    };
    let format = a.format.unwrap_or_else(|| DatasetFormat::for_kind(kind));
    if format.kind() != kind {
        bail!("format {format:?} does not hold {kind} data");
    }
    let train_path = match (&a.train, &a.run_dir, &summary) {
        (Some(t), _, _) => t.clone(),
        (None, Some(d), Some(s)) => {
            let split = format!("train.{}", format.extension());
            let name = if s.files.contains(&split) { split } else { output_name(format) };
            d.join(name)
        }
        _ => bail!("--train or --run-dir is required"),
    };
    let train: Vec<AnnotatedInstance> = dataset::read_file(&train_path, format, Provenance::Gold)?;
    let test: Vec<AnnotatedInstance> = dataset::read_file(&a.test, format, Provenance::Gold)?;
    let labels = label_order(kind, summary.as_ref().map(|s| s.labels.as_slice()).unwrap_or(&[]));
    let report = eval::evaluate(kind, &train, &test, &labels)?;
    if let Some(d) = &a.run_dir {
        write_json(&d.join(EVAL_FILE), &report)?;
    }
    Ok(report)
}

/// One table row for a run directory. Cost is recomputed from the ledger
/// records and the recorded price schedule.
pub fn row(dir: &Path) -> Result<(TaskKind, ReportRow)> {
    let s = read_summary(dir)?;
    let records = read_ledger(&dir.join(LEDGER_FILE))?;
    let cost = cost_of(&records, &price_of(dir)?);
    let ts = dir.join(TIMESTAMPS_FILE);
    let time_mins = if ts.exists() { read_json::<Timestamps>(&ts)?.wall_time_minutes } else { 0.0 };
    let ev = dir.join(EVAL_FILE);
    let metrics = if ev.exists() {
        let r: EvalReport = read_json(&ev)?;
        if r.task != s.task {
            bail!("{}: evaluated as {} but the run is {}", ev.display(), r.task, s.task);
        }
        Some(metric_values(&r))
    } else {
        None
    };
    Ok((s.task, ReportRow { approach: s.approach, num_samples: s.emitted, cost_usd: cost, time_mins, metrics }))
}

/// A comparison table with one row per run, in argument order.
pub fn report(dirs: &[PathBuf]) -> Result<String> {
    if dirs.is_empty() {
        bail!("no run directories given");
    }
    let mut kind = None;
    let mut rows = Vec::new();
    for d in dirs {
        let (k, r) = row(d)?;
        match kind {
            None => kind = Some(k),
            Some(prev) if prev != k => bail!("{} is a {k} run; earlier runs are {prev}", d.display()),
            _ => {}
        }
        rows.push(r);
    }
    Ok(render_table(metric_columns(kind.expect("non-empty")), &rows))
}
