//! Prompt-guided annotation of unlabeled inputs.
//!
//! Classification, relation and ASTE items take one completion each. NER runs
//! one type pass per entity type, then asks a disambiguation prompt for every
//! candidate proposed under two or more types. Direct inference over test
//! data is the same code with [`Provenance::Pgi`].

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::align::{align_spans, align_tokens};
use crate::backend::UsageLedger;
use crate::model::{
    validate_instance, AnnotatedInstance, Annotation, AsteTriplet, EntitySpan, LabelSpace, Mention, Provenance,
    RelationInstance, SurfaceTriplet, TaskKind, TaskSpec,
};
use crate::parse::{parse_answer, AnswerGrammar, Parsed};
use crate::prompt::{default_variant, DisambiguationShot, Family, PromptError, Query, RenderedPrompt};
use crate::runner::{stage, Runner};
use crate::tokenize::tokenize;

#[derive(Debug, thiserror::Error)]
pub enum AnnotateError {
    #[error("spec is {found}, this pipeline needs {expected}")]
    WrongKind { expected: TaskKind, found: TaskKind },
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error("no definition for entity type {entity_type}: {reason}")]
    Definition { entity_type: String, reason: String },
    #[error("definition cache {path}: {message}")]
    Cache { path: String, message: String },
}

/// An input that produced no instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dropped {
    pub index: usize,
    pub item: Query,
    pub reason: String,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub raw: String,
}

#[derive(Debug, Clone)]
pub struct AnnotationRun {
    pub kind: TaskKind,
    pub variant: String,
    pub provenance: Provenance,
    /// Input order.
    pub outputs: Vec<AnnotatedInstance>,
    pub dropped: Vec<Dropped>,
    /// Recoverable events: discarded candidates, disambiguation fallbacks.
    pub notes: Vec<String>,
    pub ledger: Arc<UsageLedger>,
}

/// A NER surface proposed by at least one type pass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TypedCandidate {
    pub surface: String,
    /// Label-space order.
    pub proposed_types: Vec<String>,
    pub sentence_index: usize,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone)]
pub struct AnnotateOptions {
    /// Template id; the kind's default when unset.
    pub variant: Option<String>,
    pub provenance: Provenance,
    pub disambiguation_variant: Option<String>,
    pub disambiguation_shots: Vec<DisambiguationShot>,
}

impl Default for AnnotateOptions {
    fn default() -> Self {
        AnnotateOptions {
            variant: None,
            provenance: Provenance::Pgda,
            disambiguation_variant: None,
            disambiguation_shots: Vec::new(),
        }
    }
}

impl AnnotateOptions {
    pub fn variant(mut self, id: impl Into<String>) -> Self {
        self.variant = Some(id.into());
        self
    }

    pub fn pgi(mut self) -> Self {
        self.provenance = Provenance::Pgi;
        self
    }
}

/// Entity-type definitions produced by the definition prompt, one per type.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DefinitionCache {
    pub definitions: BTreeMap<String, String>,
}

impl DefinitionCache {
    /// A missing file is an empty cache.
    pub fn load(path: &Path) -> Result<Self, AnnotateError> {
        let err = |message: String| AnnotateError::Cache { path: path.display().to_string(), message };
        match std::fs::read_to_string(path) {
            Ok(s) => serde_json::from_str(&s).map_err(|e| err(e.to_string())),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::default()),
            Err(e) => Err(err(e.to_string())),
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), AnnotateError> {
        let err = |message: String| AnnotateError::Cache { path: path.display().to_string(), message };
        let body = serde_json::to_string_pretty(self).map_err(|e| err(e.to_string()))? + "\n";
        let tmp = path.with_extension("tmp");
        std::fs::write(&tmp, body).map_err(|e| err(e.to_string()))?;
        std::fs::rename(&tmp, path).map_err(|e| err(e.to_string()))
    }

    pub fn get(&self, entity_type: &str) -> Option<&str> {
        self.definitions.get(entity_type).map(String::as_str)
    }
}

fn expect_kind(spec: &TaskSpec, expected: TaskKind) -> Result<(), AnnotateError> {
    if spec.kind != expected {
        return Err(AnnotateError::WrongKind { expected, found: spec.kind });
    }
    Ok(())
}

fn variant_for(opt: &Option<String>, kind: TaskKind, family: Family) -> String {
    opt.clone().or_else(|| default_variant(kind, family).map(str::to_string)).unwrap_or_default()
}

/// Token indices of the first contiguous match of `surface`.
fn token_indices(sentence: &str, surface: &str) -> Option<Vec<usize>> {
    let toks = tokenize(sentence);
    align_tokens(&toks, surface).map(|r| r.collect())
}

/// Keeps the longest spans; ties go to the earlier start, then label order.
pub fn resolve_overlaps(mut spans: Vec<EntitySpan>, space: &LabelSpace) -> Vec<EntitySpan> {
    let rank = |s: &EntitySpan| space.index_of(&s.entity_type).unwrap_or(usize::MAX);
    spans.sort_by(|a, b| b.len().cmp(&a.len()).then(a.start.cmp(&b.start)).then(rank(a).cmp(&rank(b))));
    let mut kept: Vec<EntitySpan> = Vec::new();
    for s in spans {
        if !kept.iter().any(|k| k.overlaps(&s)) {
            kept.push(s);
        }
    }
    kept.sort_by_key(|s| (s.start, s.end));
    kept
}

type Outcome = Result<AnnotatedInstance, (String, String)>;

struct Collector {
    spec_kind: TaskKind,
    provenance: Provenance,
    results: BTreeMap<usize, Outcome>,
    notes: Vec<(usize, String)>,
}

impl Collector {
    fn new(spec: &TaskSpec, provenance: Provenance) -> Self {
        Collector { spec_kind: spec.kind, provenance, results: BTreeMap::new(), notes: Vec::new() }
    }

    fn drop(&mut self, i: usize, reason: impl Into<String>, raw: impl Into<String>) {
        self.results.insert(i, Err((reason.into(), raw.into())));
    }

    fn keep(&mut self, i: usize, ann: Annotation, spec: &TaskSpec) {
        let inst = AnnotatedInstance::new(ann, self.provenance);
        let verdict = validate_instance(&inst, spec);
        if verdict.is_ok() {
            self.results.insert(i, Ok(inst));
        } else {
            self.drop(i, format!("invalid: {verdict}"), "");
        }
    }

    fn finish(mut self, items: &[Query], variant: String, ledger: Arc<UsageLedger>) -> AnnotationRun {
        let mut outputs = Vec::new();
        let mut dropped = Vec::new();
        for (index, r) in self.results {
            match r {
                Ok(inst) => outputs.push(inst),
                Err((reason, raw)) => dropped.push(Dropped { index, item: items[index].clone(), reason, raw }),
            }
        }
        self.notes.sort_by_key(|(i, _)| *i);
        AnnotationRun {
            kind: self.spec_kind,
            variant,
            provenance: self.provenance,
            outputs,
            dropped,
            notes: self.notes.into_iter().map(|(i, n)| format!("#{i}: {n}")).collect(),
            ledger,
        }
    }
}

impl Runner {
    /// One PGDA completion per item, parsed under the template's grammar.
    fn annotate_single(
        &self,
        spec: &TaskSpec,
        items: &[Query],
        opts: &AnnotateOptions,
    ) -> Result<AnnotationRun, AnnotateError> {
        let variant = variant_for(&opts.variant, spec.kind, Family::Pgda);
        let grammar = self.engine.template(&variant, spec.kind, &[Family::Pgda])?.file.answer;
        let mut col = Collector::new(spec, opts.provenance);
        let mut pending: Vec<(usize, RenderedPrompt)> = Vec::new();
        for (i, item) in items.iter().enumerate() {
            match self.engine.render_pgda(spec, item, &variant) {
                Ok(p) => pending.push((i, p)),
                Err(e) => col.drop(i, format!("prompt: {e}"), ""),
            }
        }
        let prompts: Vec<&RenderedPrompt> = pending.iter().map(|(_, p)| p).collect();
        let results = self.batch(&prompts, self.annotation_temperature, stage::ANNOTATE);
        for ((i, prompt), r) in pending.iter().zip(results) {
            let c = match r {
                Ok(c) => c,
                Err(e) => {
                    col.drop(*i, format!("backend: {e}"), "");
                    continue;
                }
            };
            match parse_answer(grammar, prompt, &c.text, &spec.label_space) {
                Err(f) => col.drop(*i, f.reason.as_str(), f.raw),
                Ok(parsed) => self.build_single(spec, &items[*i], *i, parsed, &c.text, &mut col),
            }
        }
        Ok(col.finish(items, variant, self.ledger().clone()))
    }

    fn build_single(&self, spec: &TaskSpec, item: &Query, i: usize, parsed: Parsed, raw: &str, col: &mut Collector) {
        match (spec.kind, parsed) {
            (TaskKind::Classification, Parsed::Label { label }) => {
                col.keep(i, Annotation::Classification { text: item.text.clone(), label }, spec)
            }
            (TaskKind::RelationExtraction, Parsed::Label { label }) => {
                let ann = Annotation::Relation(RelationInstance {
                    sentence: item.text.clone(),
                    head: Mention::new(item.head.clone().unwrap_or_default()),
                    tail: Mention::new(item.tail.clone().unwrap_or_default()),
                    relation: label,
                });
                col.keep(i, ann, spec)
            }
            (TaskKind::Aste, Parsed::Triplets { triplets }) => {
                let mut kept: Vec<AsteTriplet> = Vec::new();
                for t in &triplets {
                    match align_triplet(&item.text, t) {
                        Some(a) if !kept.contains(&a) => kept.push(a),
                        Some(_) => {}
                        None => {
                            col.notes.push((i, format!("triplet ({}, {}) not found in sentence", t.target, t.opinion)))
                        }
                    }
                }
                col.keep(i, Annotation::Aste { sentence: item.text.clone(), triplets: kept }, spec)
            }
            (_, other) => col.drop(i, format!("grammar produced {other:?}"), raw),
        }
    }

    pub fn annotate_classification(
        &self,
        spec: &TaskSpec,
        items: &[Query],
        opts: &AnnotateOptions,
    ) -> Result<AnnotationRun, AnnotateError> {
        expect_kind(spec, TaskKind::Classification)?;
        self.annotate_single(spec, items, opts)
    }

    pub fn annotate_relation(
        &self,
        spec: &TaskSpec,
        items: &[Query],
        opts: &AnnotateOptions,
    ) -> Result<AnnotationRun, AnnotateError> {
        expect_kind(spec, TaskKind::RelationExtraction)?;
        self.annotate_single(spec, items, opts)
    }

    pub fn annotate_aste(
        &self,
        spec: &TaskSpec,
        items: &[Query],
        opts: &AnnotateOptions,
    ) -> Result<AnnotationRun, AnnotateError> {
        expect_kind(spec, TaskKind::Aste)?;
        self.annotate_single(spec, items, opts)
    }

    /// Fills every entity type's definition: spec first, then `cache`, then one
    /// definition completion per remaining type (stored into `cache`).
    pub fn resolve_definitions(
        &self,
        spec: &TaskSpec,
        cache: &mut DefinitionCache,
    ) -> Result<Vec<(String, String)>, AnnotateError> {
        let mut missing: Vec<(String, RenderedPrompt)> = Vec::new();
        for ty in spec.label_space.iter() {
            if spec.label_space.definition(ty).is_none() && cache.get(ty).is_none() {
                missing.push((ty.to_string(), self.engine.render_definition(spec, ty)?));
            }
        }
        let prompts: Vec<&RenderedPrompt> = missing.iter().map(|(_, p)| p).collect();
        let results = self.batch(&prompts, self.annotation_temperature, stage::DEFINITION);
        for ((ty, prompt), r) in missing.iter().zip(results) {
            let fail = |reason: String| AnnotateError::Definition { entity_type: ty.clone(), reason };
            let c = r.map_err(|e| fail(e.to_string()))?;
            match parse_answer(AnswerGrammar::Definition, prompt, &c.text, &spec.label_space) {
                Ok(Parsed::Sentence { text }) => {
                    cache.definitions.insert(ty.clone(), text);
                }
                Ok(other) => return Err(fail(format!("unexpected answer {other:?}"))),
                Err(f) => return Err(fail(f.reason.as_str().to_string())),
            }
        }
        Ok(spec
            .label_space
            .iter()
            .map(|ty| {
                let d = spec.label_space.definition(ty).or_else(|| cache.get(ty)).unwrap_or_default();
                (ty.to_string(), d.to_string())
            })
            .collect())
    }

    /// Two-pass NER: per-type extraction, then disambiguation of candidates
    /// proposed under several types. One instance per sentence.
    pub fn annotate_ner(
        &self,
        spec: &TaskSpec,
        sentences: &[Query],
        opts: &AnnotateOptions,
        cache: &mut DefinitionCache,
    ) -> Result<AnnotationRun, AnnotateError> {
        expect_kind(spec, TaskKind::Ner)?;
        let variant = variant_for(&opts.variant, TaskKind::Ner, Family::TypePass);
        let dis_variant = variant_for(&opts.disambiguation_variant, TaskKind::Ner, Family::Disambiguation);
        let grammar = self.engine.template(&variant, TaskKind::Ner, &[Family::TypePass])?.file.answer;
        let dis_grammar = self.engine.template(&dis_variant, TaskKind::Ner, &[Family::Disambiguation])?.file.answer;
        let defs = self.resolve_definitions(spec, cache)?;
        let mut col = Collector::new(spec, opts.provenance);

        // stage 1: every (sentence, type) pass
        let mut passes: Vec<(usize, usize, RenderedPrompt)> = Vec::new();
        for (i, q) in sentences.iter().enumerate() {
            let mut rendered = Vec::new();
            for (j, (ty, def)) in defs.iter().enumerate() {
                match self.engine.render_ner_type_pass_with(spec, ty, def, &q.text, &variant) {
                    Ok(p) => rendered.push((i, j, p)),
                    Err(e) => {
                        col.drop(i, format!("prompt: {e}"), "");
                        rendered.clear();
                        break;
                    }
                }
            }
            passes.extend(rendered);
        }
        let prompts: Vec<&RenderedPrompt> = passes.iter().map(|(_, _, p)| p).collect();
        let results = self.batch(&prompts, self.annotation_temperature, stage::TYPE_PASS);

        let mut candidates: BTreeMap<usize, BTreeMap<(usize, usize), TypedCandidate>> = BTreeMap::new();
        let mut failed_passes: BTreeMap<usize, usize> = BTreeMap::new();
        for ((i, j, prompt), r) in passes.iter().zip(results) {
            let sentence = &sentences[*i].text;
            let per = candidates.entry(*i).or_default();
            let ty = &defs[*j].0;
            let entities = match r.map_err(|e| e.to_string()).and_then(|c| {
                parse_answer(grammar, prompt, &c.text, &spec.label_space).map_err(|f| f.reason.as_str().to_string())
            }) {
                Ok(Parsed::Entities { entities }) => entities,
                Ok(other) => {
                    col.notes.push((*i, format!("{ty} pass: unexpected answer {other:?}")));
                    continue;
                }
                Err(e) => {
                    *failed_passes.entry(*i).or_default() += 1;
                    col.notes.push((*i, format!("{ty} pass failed: {e}")));
                    continue;
                }
            };
            for surface in entities {
                let Some((s, e)) = align_spans(sentence, &surface) else {
                    col.notes.push((*i, format!("{surface:?} ({ty}) not found in sentence")));
                    continue;
                };
                let c = per.entry((s, e)).or_insert_with(|| TypedCandidate {
                    surface: sentence[s..e].to_string(),
                    proposed_types: Vec::new(),
                    sentence_index: *i,
                    start: s,
                    end: e,
                });
                if !c.proposed_types.contains(ty) {
                    c.proposed_types.push(ty.clone());
                }
            }
        }

        // stage 2: disambiguation, after every pass of a sentence is in
        let mut asks: Vec<(usize, (usize, usize), RenderedPrompt)> = Vec::new();
        for (i, per) in &candidates {
            for (key, c) in per {
                if c.proposed_types.len() < 2 {
                    continue;
                }
                let p = self.engine.render_disambiguation_with(
                    &sentences[*i].text,
                    &c.surface,
                    &c.proposed_types,
                    &opts.disambiguation_shots,
                    &dis_variant,
                )?;
                asks.push((*i, *key, p));
            }
        }
        let prompts: Vec<&RenderedPrompt> = asks.iter().map(|(_, _, p)| p).collect();
        let results = self.batch(&prompts, self.annotation_temperature, stage::DISAMBIGUATION);
        let mut chosen: BTreeMap<(usize, (usize, usize)), String> = BTreeMap::new();
        for ((i, key, prompt), r) in asks.iter().zip(results) {
            let c = &candidates[i][key];
            let space = LabelSpace::new(c.proposed_types.iter().cloned()).expect("candidate types are labels");
            let answer = r.map_err(|e| e.to_string()).and_then(|res| {
                parse_answer(dis_grammar, prompt, &res.text, &space)
                    .map_err(|f| format!("{} {:?}", f.reason.as_str(), f.raw))
            });
            let ty = match answer {
                Ok(Parsed::Label { label }) => label,
                other => {
                    let why = match other {
                        Err(e) => e,
                        Ok(p) => format!("unexpected answer {p:?}"),
                    };
                    col.notes.push((
                        *i,
                        format!("disambiguation of {:?} failed ({why}); kept {}", c.surface, c.proposed_types[0]),
                    ));
                    c.proposed_types[0].clone()
                }
            };
            chosen.insert((*i, *key), ty);
        }

        for (i, q) in sentences.iter().enumerate() {
            if col.results.contains_key(&i) {
                continue;
            }
            if failed_passes.get(&i).copied().unwrap_or(0) == defs.len() && !defs.is_empty() {
                col.drop(i, "backend: every type pass failed", "");
                continue;
            }
            let spans: Vec<EntitySpan> = candidates
                .get(&i)
                .into_iter()
                .flat_map(|per| per.iter())
                .filter_map(|(key, c)| {
                    let ty = chosen.get(&(i, *key)).cloned().unwrap_or_else(|| c.proposed_types[0].clone());
                    EntitySpan::new(&q.text, c.start, c.end, ty)
                })
                .collect();
            let spans = resolve_overlaps(spans, &spec.label_space);
            col.keep(i, Annotation::Ner { sentence: q.text.clone(), spans }, spec);
        }
        Ok(col.finish(sentences, variant, self.ledger().clone()))
    }

    /// Dispatches on the spec's kind.
    pub fn annotate(
        &self,
        spec: &TaskSpec,
        items: &[Query],
        opts: &AnnotateOptions,
        cache: &mut DefinitionCache,
    ) -> Result<AnnotationRun, AnnotateError> {
        match spec.kind {
            TaskKind::Ner => self.annotate_ner(spec, items, opts, cache),
            _ => self.annotate_single(spec, items, opts),
        }
    }
}

/// Aligns both surfaces of a triplet to token indices.
pub fn align_triplet(sentence: &str, t: &SurfaceTriplet) -> Option<AsteTriplet> {
    let target = token_indices(sentence, &t.target)?;
    let opinion = token_indices(sentence, &t.opinion)?;
    AsteTriplet::from_indices(sentence, target, opinion, t.sentiment)
}
