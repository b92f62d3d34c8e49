//! Two-step data generation: labeled spans first, then a sentence carrying
//! them. The dictionary variant takes its spans from knowledge-base entries.
//!
//! Every emitted sentence is checked against its seed: RE heads and tails by
//! containment, NER entities and ASTE targets/opinions by token alignment.
//! A sentence that fails gets `sentence_retries` fresh samples, then the seed
//! is dropped.

use std::collections::{BTreeMap, HashSet};
use std::sync::Arc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::align::token_matches;
use crate::annotate::align_triplet;
use crate::backend::UsageLedger;
use crate::dataset::normalize_text;
use crate::dictionary::{DictError, DictQuery, DictValue, DictionaryClient};
use crate::model::{
    label_key, validate_instance, AnnotatedInstance, Annotation, AsteTriplet, EntitySpan, Mention, Provenance,
    RelationInstance, SeedPayload, Sentiment, SurfaceTriplet, TaskKind, TaskSpec,
};
use crate::parse::{parse_answer, AnswerGrammar, Parsed};
use crate::prompt::{default_variant, Family, PromptError, RenderedPrompt};
use crate::runner::{stage, Runner};
use crate::tokenize::tokenize;

#[derive(Debug, thiserror::Error)]
pub enum GenerateError {
    #[error("spec is {found}, this pipeline needs {expected}")]
    WrongKind { expected: TaskKind, found: TaskKind },
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("invalid budget: {0}")]
    Budget(String),
    #[error("entity pools hold {have} distinct entities, need at least {need}")]
    PoolTooSmall { need: usize, have: usize },
    #[error("dictionary returned nothing for {label}")]
    DictionaryEmpty { label: String },
    #[error("dictionary query for {label}: {source}")]
    Dictionary { label: String, source: DictError },
    #[error("no dictionary query configured for {0}")]
    MissingQuery(String),
    #[error("unknown label {0}")]
    UnknownLabel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSource {
    Generated,
    Dictionary,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpanSeed {
    pub label: String,
    pub payload: SeedPayload,
    pub source: SeedSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationBudget {
    pub per_label_cap: usize,
    /// Items requested per span prompt.
    pub per_prompt_count: usize,
    /// Inclusive range of entities drawn per NER sentence.
    pub entities_per_sentence: (usize, usize),
    /// NER sentences to assemble seeds for.
    pub sentences: usize,
    /// Extra samples for a sentence that fails verification.
    pub sentence_retries: usize,
}

impl Default for GenerationBudget {
    fn default() -> Self {
        GenerationBudget {
            per_label_cap: 200,
            per_prompt_count: 20,
            entities_per_sentence: (2, 4),
            sentences: 1500,
            sentence_retries: 1,
        }
    }
}

impl GenerationBudget {
    pub fn validate(&self) -> Result<(), GenerateError> {
        let (lo, hi) = self.entities_per_sentence;
        if self.per_label_cap == 0 {
            return Err(GenerateError::Budget("per_label_cap must be at least 1".into()));
        }
        if self.per_prompt_count == 0 {
            return Err(GenerateError::Budget("per_prompt_count must be at least 1".into()));
        }
        if lo == 0 || lo > hi {
            return Err(GenerateError::Budget(format!("entities_per_sentence ({lo}, {hi}) needs 1 <= min <= max")));
        }
        Ok(())
    }
}

/// Template choices for a run; each falls back to the kind's default.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerateOptions {
    pub span_variant: Option<String>,
    pub sentence_variant: Option<String>,
    pub opinion_variant: Option<String>,
    /// Seed for NER entity sampling.
    pub seed: u64,
}

/// Result of the span stage for one label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanHarvest {
    pub label: String,
    pub seeds: Vec<SpanSeed>,
    pub calls: usize,
    /// The cap was not reached: two calls in a row added nothing new.
    pub stalled: bool,
    /// Unparseable completions and rejected lines.
    pub rejected: usize,
}

/// A seed that produced no instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedDrop {
    pub index: usize,
    pub seed: SpanSeed,
    pub reason: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub raw: String,
    pub attempts: usize,
}

#[derive(Debug, Clone)]
pub struct GenerationRun {
    pub kind: TaskKind,
    pub provenance: Provenance,
    /// Seed order.
    pub outputs: Vec<AnnotatedInstance>,
    pub dropped: Vec<SeedDrop>,
    /// Verified instances removed as repeats of an earlier one.
    pub duplicates: usize,
    /// Verified instances removed by the per-label cap.
    pub over_cap: usize,
    pub harvests: Vec<SpanHarvest>,
    pub seeds: Vec<SpanSeed>,
    pub notes: Vec<String>,
    pub ledger: Arc<UsageLedger>,
}

/// Query settings for the dictionary variant, keyed by canonical label.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DadgPlan {
    pub queries: BTreeMap<String, DictQuery>,
    /// Classification and ASTE: entities shared by every label.
    pub shared: Option<DictQuery>,
}

fn expect_kind(spec: &TaskSpec, expected: TaskKind) -> Result<(), GenerateError> {
    if spec.kind != expected {
        return Err(GenerateError::WrongKind { expected, found: spec.kind });
    }
    Ok(())
}

fn variant(opt: &Option<String>, kind: TaskKind, family: Family) -> String {
    opt.clone().or_else(|| default_variant(kind, family).map(str::to_string)).unwrap_or_default()
}

fn fold(s: &str) -> String {
    s.trim().chars().flat_map(char::to_lowercase).collect()
}

fn triplet_key(ts: &[SurfaceTriplet]) -> String {
    let mut parts: Vec<String> =
        ts.iter().map(|t| format!("{}\u{1}{}\u{1}{}", fold(&t.target), fold(&t.opinion), t.sentiment.code())).collect();
    parts.sort();
    parts.dedup();
    parts.join("\u{2}")
}

/// Dedup key and seed for each item a span completion yields.
fn span_items(kind: TaskKind, label: &str, parsed: Parsed) -> (Vec<(String, SpanSeed)>, usize) {
    let seed = |payload| SpanSeed { label: label.to_string(), payload, source: SeedSource::Generated };
    match (kind, parsed) {
        (TaskKind::RelationExtraction, Parsed::Pairs { pairs, rejected }) => (
            pairs
                .into_iter()
                .map(|(h, t)| {
                    let key = format!("{}\u{1}{}", fold(&h), fold(&t));
                    (key, seed(SeedPayload::Pair { head: h, tail: t, relation: label.to_string() }))
                })
                .collect(),
            rejected,
        ),
        (TaskKind::Ner, Parsed::Entities { entities }) => (
            entities
                .into_iter()
                .map(|e| (fold(&e), seed(SeedPayload::Entities { entities: vec![(e, label.to_string())] })))
                .collect(),
            0,
        ),
        (TaskKind::Aste, Parsed::TripletSets { sets, rejected }) => (
            sets.into_iter()
                .map(|ts| {
                    let l = ts[0].sentiment.as_str().to_string();
                    (
                        triplet_key(&ts),
                        SpanSeed {
                            label: l,
                            payload: SeedPayload::Triplets { triplets: ts },
                            source: SeedSource::Generated,
                        },
                    )
                })
                .collect(),
            rejected,
        ),
        (TaskKind::Aste, Parsed::Triplets { triplets }) => (
            triplets
                .into_iter()
                .map(|t| {
                    let one = vec![t];
                    let l = one[0].sentiment.as_str().to_string();
                    (
                        triplet_key(&one),
                        SpanSeed {
                            label: l,
                            payload: SeedPayload::Triplets { triplets: one },
                            source: SeedSource::Generated,
                        },
                    )
                })
                .collect(),
            0,
        ),
        _ => (Vec::new(), 1),
    }
}

struct Harvest<T> {
    label: String,
    seen: HashSet<String>,
    items: Vec<T>,
    calls: usize,
    idle: usize,
    rejected: usize,
}

impl<T> Harvest<T> {
    fn active(&self, cap: usize) -> bool {
        self.items.len() < cap && self.idle < 2
    }
}

/// Runs span prompts round by round, one prompt per still-active label per
/// round, until every label is capped or stalled.
fn harvest<T>(
    runner: &Runner,
    labels: &[String],
    cap: usize,
    prompts: &[RenderedPrompt],
    grammar: AnswerGrammar,
    spec: &TaskSpec,
    extract: impl Fn(&str, Parsed) -> (Vec<(String, T)>, usize),
) -> Vec<Harvest<T>> {
    let mut hs: Vec<Harvest<T>> = labels
        .iter()
        .map(|l| Harvest { label: l.clone(), seen: HashSet::new(), items: Vec::new(), calls: 0, idle: 0, rejected: 0 })
        .collect();
    loop {
        let active: Vec<usize> = (0..hs.len()).filter(|&i| hs[i].active(cap)).collect();
        if active.is_empty() {
            break;
        }
        let batch: Vec<&RenderedPrompt> = active.iter().map(|&i| &prompts[i]).collect();
        let results = runner.batch(&batch, runner.generation_temperature, stage::SPAN);
        // serialized reduction, label order
        for (&i, r) in active.iter().zip(results) {
            let h = &mut hs[i];
            h.calls += 1;
            let before = h.items.len();
            match r.map(|c| parse_answer(grammar, &prompts[i], &c.text, &spec.label_space)) {
                Ok(Ok(parsed)) => {
                    let (items, rejected) = extract(&h.label, parsed);
                    h.rejected += rejected;
                    for (key, item) in items {
                        if h.items.len() < cap && h.seen.insert(key) {
                            h.items.push(item);
                        }
                    }
                }
                _ => h.rejected += 1,
            }
            h.idle = if h.items.len() > before { 0 } else { h.idle + 1 };
        }
    }
    hs
}

/// Non-overlapping token-aligned placement for every entity, searched in
/// seed order with backtracking. Spans come back sorted by offset.
pub fn align_entities(sentence: &str, entities: &[(String, String)]) -> Result<Vec<EntitySpan>, String> {
    let toks = tokenize(sentence);
    let mut options = Vec::with_capacity(entities.len());
    for (surface, _) in entities {
        let m = token_matches(&toks, surface);
        if m.is_empty() {
            return Err(format!("entity {surface:?} not in sentence"));
        }
        options.push(m);
    }
    fn place(k: usize, options: &[Vec<std::ops::Range<usize>>], chosen: &mut Vec<std::ops::Range<usize>>) -> bool {
        if k == options.len() {
            return true;
        }
        for r in &options[k] {
            if chosen.iter().all(|c| r.end <= c.start || r.start >= c.end) {
                chosen.push(r.clone());
                if place(k + 1, options, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::new();
    if !place(0, &options, &mut chosen) {
        return Err("entities cannot be placed without overlap".into());
    }
    let mut spans: Vec<EntitySpan> = chosen
        .iter()
        .zip(entities)
        .map(|(r, (_, ty))| {
            let (s, e) = (toks[r.start].start, toks[r.end - 1].end);
            EntitySpan { surface: sentence[s..e].to_string(), start: s, end: e, entity_type: ty.clone() }
        })
        .collect();
    spans.sort_by_key(|s| (s.start, s.end));
    Ok(spans)
}

fn contains_ci(hay: &str, needle: &str) -> bool {
    fold(hay).contains(&fold(needle))
}

/// Checks a generated sentence against its seed and builds the instance.
pub fn verify_sentence(sentence: &str, seed: &SpanSeed) -> Result<Annotation, String> {
    match &seed.payload {
        SeedPayload::Label { label, entity } => {
            if let Some(e) = entity {
                if !contains_ci(sentence, e) {
                    return Err(format!("entity {e:?} not in text"));
                }
            }
            Ok(Annotation::Classification { text: sentence.to_string(), label: label.clone() })
        }
        SeedPayload::Pair { head, tail, relation } => {
            for (role, s) in [("head", head), ("tail", tail)] {
                if !sentence.contains(s.as_str()) {
                    return Err(format!("{role} {s:?} not in sentence"));
                }
            }
            Ok(Annotation::Relation(RelationInstance {
                sentence: sentence.to_string(),
                head: Mention::new(head.clone()),
                tail: Mention::new(tail.clone()),
                relation: relation.clone(),
            }))
        }
        SeedPayload::Entities { entities } => {
            let spans = align_entities(sentence, entities)?;
            Ok(Annotation::Ner { sentence: sentence.to_string(), spans })
        }
        SeedPayload::Triplets { triplets } => {
            let mut out: Vec<AsteTriplet> = Vec::new();
            for t in triplets {
                let a = align_triplet(sentence, t)
                    .ok_or_else(|| format!("triplet ({}, {}) not in sentence", t.target, t.opinion))?;
                if !out.contains(&a) {
                    out.push(a);
                }
            }
            Ok(Annotation::Aste { sentence: sentence.to_string(), triplets: out })
        }
    }
}

/// Draws `budget.sentences` seeds of k entities each, k uniform in the
/// budget range (clamped to the pool), sampled without replacement from the
/// union of the pools. Surfaces repeated across pools keep their first type.
pub fn assemble_ner_seeds(
    pools: &BTreeMap<String, Vec<String>>,
    budget: &GenerationBudget,
    rng_seed: u64,
    source: SeedSource,
) -> Result<Vec<SpanSeed>, GenerateError> {
    budget.validate()?;
    let mut seen = HashSet::new();
    let mut union: Vec<(String, String)> = Vec::new();
    for (ty, names) in pools {
        for n in names {
            if seen.insert(fold(n)) {
                union.push((n.clone(), ty.clone()));
            }
        }
    }
    let (lo, hi) = budget.entities_per_sentence;
    if union.len() < lo {
        return Err(GenerateError::PoolTooSmall { need: lo, have: union.len() });
    }
    let hi = hi.min(union.len());
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut out = Vec::with_capacity(budget.sentences);
    for _ in 0..budget.sentences {
        let k = rng.gen_range(lo..=hi);
        let entities: Vec<(String, String)> =
            sample(&mut rng, union.len(), k).into_iter().map(|i| union[i].clone()).collect();
        out.push(SpanSeed { label: entities[0].1.clone(), payload: SeedPayload::Entities { entities }, source });
    }
    Ok(out)
}

/// Type → distinct surfaces, from NER span harvests.
pub fn pools_from(harvests: &[SpanHarvest]) -> BTreeMap<String, Vec<String>> {
    let mut pools = BTreeMap::new();
    for h in harvests {
        let names: &mut Vec<String> = pools.entry(h.label.clone()).or_default();
        for s in &h.seeds {
            if let SeedPayload::Entities { entities } = &s.payload {
                names.extend(entities.iter().map(|(n, _)| n.clone()));
            }
        }
    }
    pools
}

impl Runner {
    /// Span stage for one label.
    pub fn generate_spans(
        &self,
        spec: &TaskSpec,
        label: &str,
        budget: &GenerationBudget,
        opts: &GenerateOptions,
    ) -> Result<SpanHarvest, GenerateError> {
        let mut v = self.generate_spans_for(spec, &[label.to_string()], budget, opts)?;
        Ok(v.remove(0))
    }

    /// Span stage for several labels at once; rounds run the labels in one
    /// batch. Not for classification, whose span step is the review itself.
    pub fn generate_spans_for(
        &self,
        spec: &TaskSpec,
        labels: &[String],
        budget: &GenerationBudget,
        opts: &GenerateOptions,
    ) -> Result<Vec<SpanHarvest>, GenerateError> {
        budget.validate()?;
        if spec.kind == TaskKind::Classification {
            return Err(GenerateError::WrongKind { expected: TaskKind::Ner, found: spec.kind });
        }
        let id = variant(&opts.span_variant, spec.kind, Family::Span);
        let grammar = self.engine.template(&id, spec.kind, &[Family::Span])?.file.answer;
        let mut canon = Vec::with_capacity(labels.len());
        let mut prompts = Vec::with_capacity(labels.len());
        for l in labels {
            let c = spec.label_space.canonical(l).ok_or_else(|| GenerateError::UnknownLabel(l.clone()))?;
            prompts.push(self.engine.render_pgdg_span(spec, c, budget.per_prompt_count, &id)?);
            canon.push(c.to_string());
        }
        let kind = spec.kind;
        let hs = harvest(self, &canon, budget.per_label_cap, &prompts, grammar, spec, |l, p| span_items(kind, l, p));
        Ok(hs
            .into_iter()
            .map(|h| SpanHarvest {
                stalled: h.items.len() < budget.per_label_cap,
                label: h.label,
                seeds: h.items,
                calls: h.calls,
                rejected: h.rejected,
            })
            .collect())
    }

    /// Sentence stage: one prompt per seed, verification, retries, then
    /// validation, dedup and the per-label cap (NER excepted, where the seed
    /// count is the budget).
    pub fn generate_sentences(
        &self,
        spec: &TaskSpec,
        seeds: &[SpanSeed],
        budget: &GenerationBudget,
        opts: &GenerateOptions,
        provenance: Provenance,
    ) -> Result<GenerationRun, GenerateError> {
        budget.validate()?;
        let id = variant(&opts.sentence_variant, spec.kind, Family::Sentence);
        let grammar = self.engine.template(&id, spec.kind, &[Family::Sentence])?.file.answer;
        let mut verified: BTreeMap<usize, Annotation> = BTreeMap::new();
        let mut failed: BTreeMap<usize, (String, String, usize)> = BTreeMap::new();
        let mut pending: Vec<(usize, RenderedPrompt)> = Vec::new();
        for (i, s) in seeds.iter().enumerate() {
            match self.engine.render_sentence_gen(spec, &s.payload, &id) {
                Ok(p) => pending.push((i, p)),
                Err(e) => {
                    failed.insert(i, (format!("prompt: {e}"), String::new(), 0));
                }
            }
        }
        for _ in 0..=budget.sentence_retries {
            if pending.is_empty() {
                break;
            }
            let batch: Vec<&RenderedPrompt> = pending.iter().map(|(_, p)| p).collect();
            let results = self.batch(&batch, self.generation_temperature, stage::SENTENCE);
            let mut next = Vec::new();
            for ((i, prompt), r) in pending.into_iter().zip(results) {
                let attempts = failed.get(&i).map_or(0, |f| f.2) + 1;
                let outcome = match r {
                    Err(e) => Err((format!("backend: {e}"), String::new())),
                    Ok(c) => match parse_answer(grammar, &prompt, &c.text, &spec.label_space) {
                        Ok(Parsed::Sentence { text }) => {
                            verify_sentence(&text, &seeds[i]).map_err(|m| (format!("unverified: {m}"), text))
                        }
                        Ok(other) => Err((format!("grammar produced {other:?}"), c.text)),
                        Err(f) => Err((f.reason.as_str().to_string(), f.raw)),
                    },
                };
                match outcome {
                    Ok(ann) => {
                        failed.remove(&i);
                        verified.insert(i, ann);
                    }
                    Err((reason, raw)) => {
                        failed.insert(i, (reason, raw, attempts));
                        next.push((i, prompt));
                    }
                }
            }
            pending = next;
        }

        let mut outputs = Vec::new();
        let mut dropped: Vec<SeedDrop> = Vec::new();
        let mut seen = HashSet::new();
        let mut per_label: BTreeMap<String, usize> = BTreeMap::new();
        let (mut duplicates, mut over_cap) = (0, 0);
        for (i, seed) in seeds.iter().enumerate() {
            if let Some((reason, raw, attempts)) = failed.remove(&i) {
                dropped.push(SeedDrop { index: i, seed: seed.clone(), reason, raw, attempts });
                continue;
            }
            let Some(ann) = verified.remove(&i) else { continue };
            let inst = AnnotatedInstance::new(ann, provenance);
            let verdict = validate_instance(&inst, spec);
            if !verdict.is_ok() {
                let attempts = 1;
                dropped.push(SeedDrop {
                    index: i,
                    seed: seed.clone(),
                    reason: format!("invalid: {verdict}"),
                    raw: String::new(),
                    attempts,
                });
                continue;
            }
            let key = (normalize_text(inst.text()), format!("{:?}", strip_text(&inst.annotation)));
            if !seen.insert(key) {
                duplicates += 1;
                continue;
            }
            if spec.kind != TaskKind::Ner {
                let n = per_label.entry(label_key(&seeds[i].label)).or_default();
                if *n >= budget.per_label_cap {
                    over_cap += 1;
                    continue;
                }
                *n += 1;
            }
            outputs.push(inst);
        }
        Ok(GenerationRun {
            kind: spec.kind,
            provenance,
            outputs,
            dropped,
            duplicates,
            over_cap,
            harvests: Vec::new(),
            seeds: seeds.to_vec(),
            notes: Vec::new(),
            ledger: self.ledger().clone(),
        })
    }

    /// Review generation for classification: the span prompt returns finished
    /// texts, which become instances directly.
    pub fn generate_reviews(
        &self,
        spec: &TaskSpec,
        budget: &GenerationBudget,
        opts: &GenerateOptions,
    ) -> Result<GenerationRun, GenerateError> {
        expect_kind(spec, TaskKind::Classification)?;
        budget.validate()?;
        let id = variant(&opts.span_variant, spec.kind, Family::Span);
        let grammar = self.engine.template(&id, spec.kind, &[Family::Span])?.file.answer;
        let labels: Vec<String> = spec.label_space.iter().map(str::to_string).collect();
        let prompts = labels
            .iter()
            .map(|l| self.engine.render_pgdg_span(spec, l, budget.per_prompt_count, &id))
            .collect::<Result<Vec<_>, _>>()?;
        let hs = harvest(self, &labels, budget.per_label_cap, &prompts, grammar, spec, |_, p| match p {
            Parsed::Texts { texts } => (texts.into_iter().map(|t| (normalize_text(&t), t)).collect(), 0),
            _ => (Vec::new(), 1),
        });
        let mut outputs = Vec::new();
        let mut harvests = Vec::new();
        let mut seeds = Vec::new();
        for h in hs {
            for t in &h.items {
                outputs.push(AnnotatedInstance::new(
                    Annotation::Classification { text: t.clone(), label: h.label.clone() },
                    Provenance::Pgdg,
                ));
            }
            let label_seed = SpanSeed {
                label: h.label.clone(),
                payload: SeedPayload::Label { label: h.label.clone(), entity: None },
                source: SeedSource::Generated,
            };
            seeds.push(label_seed.clone());
            harvests.push(SpanHarvest {
                stalled: h.items.len() < budget.per_label_cap,
                label: h.label,
                seeds: vec![label_seed],
                calls: h.calls,
                rejected: h.rejected,
            });
        }
        let mut run = GenerationRun {
            kind: spec.kind,
            provenance: Provenance::Pgdg,
            outputs: Vec::new(),
            dropped: Vec::new(),
            duplicates: 0,
            over_cap: 0,
            harvests,
            seeds,
            notes: Vec::new(),
            ledger: self.ledger().clone(),
        };
        for inst in outputs {
            if validate_instance(&inst, spec).is_ok() {
                run.outputs.push(inst);
            }
        }
        Ok(run)
    }

    /// Full two-step run over every label of the spec.
    pub fn run_pgdg(
        &self,
        spec: &TaskSpec,
        budget: &GenerationBudget,
        opts: &GenerateOptions,
    ) -> Result<GenerationRun, GenerateError> {
        if spec.kind == TaskKind::Classification {
            return self.generate_reviews(spec, budget, opts);
        }
        let labels = span_labels(self, spec, opts)?;
        let harvests = self.generate_spans_for(spec, &labels, budget, opts)?;
        let seeds = match spec.kind {
            TaskKind::Ner => assemble_ner_seeds(&pools_from(&harvests), budget, opts.seed, SeedSource::Generated)?,
            _ => harvests.iter().flat_map(|h| h.seeds.iter().cloned()).collect(),
        };
        let mut run = self.generate_sentences(spec, &seeds, budget, opts, Provenance::Pgdg)?;
        for h in &harvests {
            if h.stalled {
                run.notes.push(format!(
                    "{}: stalled at {} of {} after {} calls",
                    h.label,
                    h.seeds.len(),
                    budget.per_label_cap,
                    h.calls
                ));
            }
        }
        run.harvests = harvests;
        Ok(run)
    }

    /// Dictionary-seeded run: entries replace the span stage, then the same
    /// sentence step.
    pub fn run_dadg(
        &self,
        spec: &TaskSpec,
        client: &DictionaryClient,
        plan: &DadgPlan,
        budget: &GenerationBudget,
        opts: &GenerateOptions,
    ) -> Result<GenerationRun, GenerateError> {
        budget.validate()?;
        let cap = budget.per_label_cap;
        let mut notes = Vec::new();
        let seeds: Vec<SpanSeed> = match spec.kind {
            TaskKind::RelationExtraction => {
                let mut seeds = Vec::new();
                for label in spec.label_space.iter() {
                    let Some(q) = plan.queries.get(label) else { continue };
                    let entries = client
                        .fetch_pairs(q)
                        .map_err(|source| GenerateError::Dictionary { label: label.to_string(), source })?;
                    if entries.is_empty() {
                        return Err(GenerateError::DictionaryEmpty { label: label.to_string() });
                    }
                    for e in entries.into_iter().take(cap) {
                        if let DictValue::Pair { head, tail } = e.value {
                            seeds.push(SpanSeed {
                                label: label.to_string(),
                                payload: SeedPayload::Pair { head, tail, relation: label.to_string() },
                                source: SeedSource::Dictionary,
                            });
                        }
                    }
                }
                if seeds.is_empty() {
                    return Err(GenerateError::MissingQuery("any relation".into()));
                }
                seeds
            }
            TaskKind::Ner => {
                let mut pools = BTreeMap::new();
                for label in spec.label_space.iter() {
                    let Some(q) = plan.queries.get(label) else { continue };
                    let names = entity_labels(client, q, label)?;
                    pools.insert(label.to_string(), names.into_iter().take(cap).collect::<Vec<_>>());
                }
                if pools.is_empty() {
                    return Err(GenerateError::MissingQuery("any entity type".into()));
                }
                assemble_ner_seeds(&pools, budget, opts.seed, SeedSource::Dictionary)?
            }
            TaskKind::Classification => {
                let q = plan.shared.as_ref().ok_or_else(|| GenerateError::MissingQuery("shared".into()))?;
                let names = entity_labels(client, q, "shared")?;
                let mut seeds = Vec::new();
                for label in spec.label_space.iter() {
                    for k in 0..cap {
                        seeds.push(SpanSeed {
                            label: label.to_string(),
                            payload: SeedPayload::Label {
                                label: label.to_string(),
                                entity: Some(names[k % names.len()].clone()),
                            },
                            source: SeedSource::Dictionary,
                        });
                    }
                }
                seeds
            }
            TaskKind::Aste => {
                let q = plan.shared.as_ref().ok_or_else(|| GenerateError::MissingQuery("shared".into()))?;
                let targets = entity_labels(client, q, "shared")?;
                self.aste_opinions(spec, &targets, budget, opts, &mut notes)?
            }
        };
        let mut run = self.generate_sentences(spec, &seeds, budget, opts, Provenance::Dadg)?;
        run.notes.extend(notes);
        Ok(run)
    }

    /// Asks the opinion prompt for every dictionary target. The per-sentiment
    /// variant gets one prompt per (target, sentiment).
    fn aste_opinions(
        &self,
        spec: &TaskSpec,
        targets: &[String],
        budget: &GenerationBudget,
        opts: &GenerateOptions,
        notes: &mut Vec<String>,
    ) -> Result<Vec<SpanSeed>, GenerateError> {
        let id = variant(&opts.opinion_variant, TaskKind::Aste, Family::Opinion);
        let grammar = self.engine.template(&id, TaskKind::Aste, &[Family::Opinion])?.file.answer;
        let sentiments: Vec<Sentiment> = if grammar == AnswerGrammar::SentimentLines {
            spec.label_space.iter().filter_map(|l| l.parse().ok()).collect()
        } else {
            vec![Sentiment::Positive]
        };
        let mut jobs: Vec<(String, RenderedPrompt)> = Vec::new();
        for t in targets.iter().take(budget.per_label_cap) {
            for &s in &sentiments {
                jobs.push((t.clone(), self.engine.render_aste_opinion(spec, t, s, &id)?));
            }
        }
        let batch: Vec<&RenderedPrompt> = jobs.iter().map(|(_, p)| p).collect();
        let results = self.batch(&batch, self.generation_temperature, stage::OPINION);
        let mut seeds = Vec::new();
        let mut seen = HashSet::new();
        for ((target, prompt), r) in jobs.iter().zip(results) {
            let parsed = r.map_err(|e| e.to_string()).and_then(|c| {
                parse_answer(grammar, prompt, &c.text, &spec.label_space).map_err(|f| f.reason.as_str().to_string())
            });
            let triplets: Vec<SurfaceTriplet> = match parsed {
                Ok(Parsed::Triplets { triplets }) => triplets,
                Ok(Parsed::TripletSets { sets, .. }) => sets.into_iter().flatten().collect(),
                Ok(_) => Vec::new(),
                Err(e) => {
                    notes.push(format!("opinion for {target:?}: {e}"));
                    continue;
                }
            };
            // the dictionary surface is authoritative for the target
            let triplets: Vec<SurfaceTriplet> =
                triplets.into_iter().map(|t| SurfaceTriplet::new(target.clone(), t.opinion, t.sentiment)).collect();
            if triplets.is_empty() || !seen.insert(triplet_key(&triplets)) {
                continue;
            }
            seeds.push(SpanSeed {
                label: triplets[0].sentiment.as_str().to_string(),
                payload: SeedPayload::Triplets { triplets },
                source: SeedSource::Dictionary,
            });
        }
        Ok(seeds)
    }
}

fn entity_labels(client: &DictionaryClient, q: &DictQuery, label: &str) -> Result<Vec<String>, GenerateError> {
    let entries =
        client.fetch_entities(q).map_err(|source| GenerateError::Dictionary { label: label.to_string(), source })?;
    let names: Vec<String> = entries
        .into_iter()
        .filter_map(|e| match e.value {
            DictValue::Entity { label, .. } => Some(label),
            DictValue::Pair { .. } => None,
        })
        .collect();
    if names.is_empty() {
        return Err(GenerateError::DictionaryEmpty { label: label.to_string() });
    }
    Ok(names)
}

/// Labels the span stage iterates: every label, except for ASTE templates
/// that do not take a sentiment, which run as a single group.
fn span_labels(runner: &Runner, spec: &TaskSpec, opts: &GenerateOptions) -> Result<Vec<String>, GenerateError> {
    let all: Vec<String> = spec.label_space.iter().map(str::to_string).collect();
    if spec.kind != TaskKind::Aste {
        return Ok(all);
    }
    let id = variant(&opts.span_variant, spec.kind, Family::Span);
    let grammar = runner.engine.template(&id, spec.kind, &[Family::Span])?.file.answer;
    Ok(if grammar == AnswerGrammar::SentimentLines { all } else { all.into_iter().take(1).collect() })
}

fn strip_text(a: &Annotation) -> Annotation {
    let mut a = a.clone();
    match &mut a {
        Annotation::Classification { text, .. } => text.clear(),
        Annotation::Relation(r) => r.sentence.clear(),
        Annotation::Ner { sentence, .. } | Annotation::Aste { sentence, .. } => sentence.clear(),
    }
    a
}
