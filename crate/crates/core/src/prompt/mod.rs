//! Prompt rendering for every template family.
//!
//! A prompt is laid out as the template's `order` of sections (preamble,
//! definitions, instruction, shots), non-empty sections joined by
//! `section_separator`, then `join_separator` and the query block. Shots are
//! joined by `shot_separator`. The query block always ends at the answer slot.

mod catalog;
pub mod template;

use serde::{Deserialize, Serialize};

pub use catalog::{Catalog, CatalogError, Family, PromptTemplate, Section, ShotFilter, ShotSource, TemplateFile};
use template::{RenderError, Value, Vars};

use crate::align::{align_pair, align_spans};
use crate::backend::CompletionRequest;
use crate::model::{Annotation, LabelSpace, SeedPayload, Sentiment, SurfaceTriplet, TaskKind, TaskSpec};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("unknown variant {0}")]
    UnknownVariant(String),
    #[error("missing field {0}")]
    MissingField(String),
    #[error("unknown label {0}")]
    UnknownLabel(String),
    #[error("disambiguation needs at least 2 candidates, got {0}")]
    TooFewCandidates(usize),
    #[error("entity {0:?} does not occur in the sentence")]
    EntityNotInSentence(String),
    #[error("seed carries no spans")]
    EmptySpans,
    #[error("empty input text")]
    EmptyInput,
    #[error("count must be at least 1")]
    InvalidCount,
    #[error("seed kind {found:?} does not match task kind {expected:?}")]
    KindMismatch { expected: TaskKind, found: TaskKind },
    #[error("template {id}: {message}")]
    Template { id: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub text: String,
    pub template_id: String,
    pub shot_count: usize,
    pub stop: Vec<String>,
    pub max_tokens: u32,
    /// Last line of the query block; multi-line parsers read
    /// `answer_prefix + completion`.
    pub answer_prefix: String,
    pub query_block: String,
}

impl RenderedPrompt {
    pub fn request(&self, temperature: f64, stage: &str) -> CompletionRequest {
        CompletionRequest::new(self.text.clone(), self.max_tokens)
            .temperature(temperature)
            .stop(self.stop.clone())
            .stage(stage)
    }

    /// The text a structured parser should see for `completion`.
    pub fn answer_text(&self, completion: &str) -> String {
        format!("{}{}", self.answer_prefix, completion)
    }
}

/// Input for an annotation prompt. RE queries carry head and tail surfaces.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Query {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<String>,
}

impl Query {
    pub fn text(text: impl Into<String>) -> Self {
        Query { text: text.into(), head: None, tail: None }
    }

    pub fn relation(sentence: impl Into<String>, head: impl Into<String>, tail: impl Into<String>) -> Self {
        Query { text: sentence.into(), head: Some(head.into()), tail: Some(tail.into()) }
    }
}

/// A worked example for the entity-type disambiguation prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisambiguationShot {
    pub text: String,
    pub entity: String,
    pub candidates: Vec<String>,
    pub label: String,
}

/// Default template id for a family and task kind.
pub fn default_variant(kind: TaskKind, family: Family) -> Option<&'static str> {
    use Family::*;
    use TaskKind::*;
    Some(match (kind, family) {
        (Classification, Pgda) => "pgda-sst2",
        (Classification, Span) => "pgdg-sst2",
        (Classification, Sentence) => "dadg-sst2",
        (RelationExtraction, Pgda) => "pgda-fewrel-1",
        (RelationExtraction, Span) => "pgdg-fewrel-span",
        (RelationExtraction, Sentence) => "fewrel-sentence",
        (Ner, TypePass) => "crossner-type-pass",
        (Ner, Disambiguation) => "crossner-disambiguation",
        (Ner, Definition) => "crossner-definition",
        (Ner, Span) => "pgdg-crossner-entity",
        (Ner, Sentence) => "crossner-sentence",
        (Aste, Pgda) => "pgda-aste-1",
        (Aste, Span) => "pgdg-aste-1",
        (Aste, Opinion) => "dadg-aste-opinion-1",
        (Aste, Sentence) => "aste-sentence",
        _ => return None,
    })
}

fn text(v: impl Into<String>) -> Value {
    Value::Text(v.into())
}

fn vars<const N: usize>(pairs: [(&str, Value); N]) -> Vars {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn triplet_vars(t: &SurfaceTriplet) -> Vars {
    vars([("target", text(&t.target)), ("opinion", text(&t.opinion)), ("sentiment", text(t.sentiment.as_str()))])
}

/// Sentence with head and tail wrapped as `[X HEAD ENTITY]`, `[Y TAIL ENTITY]`.
pub fn mark_entities(sentence: &str, head: &str, tail: &str) -> Option<String> {
    let ((hs, he), (ts, te)) = align_pair(sentence, head, tail)?;
    let mut parts = [(hs, he, "HEAD"), (ts, te, "TAIL")];
    parts.sort();
    let mut out = String::with_capacity(sentence.len() + 32);
    let mut at = 0;
    for (s, e, role) in parts {
        out.push_str(&sentence[at..s]);
        out.push('[');
        out.push_str(&sentence[s..e]);
        out.push(' ');
        out.push_str(role);
        out.push_str(" ENTITY]");
        at = e;
    }
    out.push_str(&sentence[at..]);
    Some(out)
}

/// Template variables for one annotated instance. With `focus`, NER entities
/// are restricted to that type.
pub fn instance_vars(ann: &Annotation, space: &LabelSpace, focus: Option<&str>) -> Vars {
    match ann {
        Annotation::Classification { text: t, label } => vars([("text", text(t)), ("label", text(label))]),
        Annotation::Relation(r) => {
            let mut v = vars([
                ("text", text(&r.sentence)),
                ("head", text(&r.head.surface)),
                ("tail", text(&r.tail.surface)),
                ("relation", text(&r.relation)),
            ]);
            if let Some(m) = mark_entities(&r.sentence, &r.head.surface, &r.tail.surface) {
                v.insert("marked_text".into(), text(m));
            }
            if let Some(d) = space.definition(&r.relation) {
                v.insert("relation_definition".into(), text(d));
            }
            v
        }
        Annotation::Ner { sentence, spans } => {
            let typed = spans
                .iter()
                .filter(|s| focus.is_none_or(|f| space.canonical(&s.entity_type) == space.canonical(f)))
                .map(|s| (s.entity_type.clone(), s.surface.clone()))
                .collect();
            vars([("text", text(sentence)), ("entities", Value::Typed(typed))])
        }
        Annotation::Aste { sentence, triplets } => vars([
            ("text", text(sentence)),
            ("triplets", Value::Triplets(triplets.iter().map(SurfaceTriplet::from).collect())),
        ]),
    }
}

fn carries_label(ann: &Annotation, space: &LabelSpace, label: &str) -> bool {
    let same = |x: &str| space.canonical(x).is_some() && space.canonical(x) == space.canonical(label);
    match ann {
        Annotation::Classification { label: l, .. } => same(l),
        Annotation::Relation(r) => same(&r.relation),
        Annotation::Ner { spans, .. } => spans.iter().any(|s| same(&s.entity_type)),
        Annotation::Aste { triplets, .. } => triplets.iter().any(|t| same(t.sentiment.as_str())),
    }
}

#[derive(Debug, Clone)]
pub struct PromptEngine {
    catalog: Catalog,
}

impl Default for PromptEngine {
    fn default() -> Self {
        PromptEngine::new(Catalog::builtin())
    }
}

impl PromptEngine {
    pub fn new(catalog: Catalog) -> Self {
        PromptEngine { catalog }
    }

    pub fn catalog(&self) -> &Catalog {
        &self.catalog
    }

    pub fn template(&self, id: &str, kind: TaskKind, families: &[Family]) -> Result<&PromptTemplate, PromptError> {
        let t = self.catalog.get(id).ok_or_else(|| PromptError::UnknownVariant(id.to_string()))?;
        if t.kind() != kind || !families.contains(&t.family()) {
            return Err(PromptError::UnknownVariant(format!(
                "{id} (a {:?} {} template) cannot serve {}",
                t.family(),
                t.kind().as_str(),
                kind.as_str()
            )));
        }
        Ok(t)
    }

    fn globals(spec: &TaskSpec) -> Vars {
        let mut g = vars([("labels", Value::List(spec.label_space.labels().to_vec()))]);
        if let Some(d) = &spec.domain_hint {
            g.insert("domain".into(), text(d));
        }
        g
    }

    /// Example-block variables for the spec's shots under template `t`.
    pub fn shot_vars(&self, t: &PromptTemplate, spec: &TaskSpec, focus: Option<&str>) -> Vec<Vars> {
        let space = &spec.label_space;
        let keep = |a: &Annotation| match (t.file.shot_filter, focus) {
            (ShotFilter::Label, Some(f)) => carries_label(a, space, f),
            _ => true,
        };
        match t.file.shots_from {
            ShotSource::Instances => spec
                .shot_annotations()
                .filter(|a| keep(a))
                .enumerate()
                .map(|(i, a)| {
                    let mut v = instance_vars(a, space, focus.filter(|_| spec.kind == TaskKind::Ner));
                    v.insert("index".into(), text((i + 1).to_string()));
                    v
                })
                .collect(),
            ShotSource::Triplets => spec
                .shot_annotations()
                .flat_map(|a| match a {
                    Annotation::Aste { triplets, .. } => triplets.clone(),
                    _ => Vec::new(),
                })
                .filter(|tr| match (t.file.shot_filter, focus) {
                    (ShotFilter::Label, Some(f)) => space.canonical(tr.sentiment.as_str()) == space.canonical(f),
                    _ => true,
                })
                .map(|tr| triplet_vars(&SurfaceTriplet::from(&tr)))
                .collect(),
            ShotSource::EntityPool => {
                let Some(f) = focus else { return Vec::new() };
                let mut pool: Vec<String> = Vec::new();
                for a in spec.shot_annotations() {
                    if let Annotation::Ner { spans, .. } = a {
                        for s in spans {
                            if space.canonical(&s.entity_type) == space.canonical(f) && !pool.contains(&s.surface) {
                                pool.push(s.surface.clone());
                            }
                        }
                    }
                }
                if pool.is_empty() {
                    Vec::new()
                } else {
                    vec![vars([("entity_type", text(f)), ("entities", Value::List(pool))])]
                }
            }
            ShotSource::External => Vec::new(),
        }
    }

    fn render_err(id: &str, e: RenderError) -> PromptError {
        match e {
            RenderError::MissingField(f) => PromptError::MissingField(f),
            other => PromptError::Template { id: id.to_string(), message: other.to_string() },
        }
    }

    /// Lays out a prompt from already-built variables.
    pub fn assemble(
        &self,
        t: &PromptTemplate,
        space: &LabelSpace,
        globals: &Vars,
        shots: &[Vars],
        query: &Vars,
    ) -> Result<RenderedPrompt, PromptError> {
        let id = t.id();
        let err = |e| Self::render_err(id, e);
        let mut sections: Vec<String> = Vec::new();
        for sec in &t.file.order {
            let s = match sec {
                Section::Preamble if !t.preamble.is_empty() => t.preamble.render(query, globals).map_err(err)?,
                Section::Instruction if !t.instruction.is_empty() => {
                    t.instruction.render(query, globals).map_err(err)?
                }
                Section::Definitions if !t.definition.is_empty() => {
                    let mut blocks = Vec::with_capacity(space.len());
                    for label in space.iter() {
                        let def = space
                            .definition(label)
                            .ok_or_else(|| PromptError::MissingField(format!("definition of {label}")))?;
                        let v = vars([("label", text(label)), ("definition", text(def))]);
                        blocks.push(t.definition.render(&v, globals).map_err(err)?);
                    }
                    blocks.join("\n")
                }
                Section::Shots if !shots.is_empty() && !t.example.is_empty() => {
                    let mut blocks = Vec::with_capacity(shots.len());
                    for v in shots {
                        blocks.push(t.example.render(v, globals).map_err(err)?);
                    }
                    blocks.join(&t.file.shot_separator)
                }
                _ => String::new(),
            };
            if !s.is_empty() {
                sections.push(s);
            }
        }
        let query_block = t.query.render(query, globals).map_err(err)?;
        let body = sections.join(&t.file.section_separator);
        let text =
            if body.is_empty() { query_block.clone() } else { format!("{body}{}{query_block}", t.file.join_separator) };
        let answer_prefix = query_block.rsplit('\n').next().unwrap_or_default().to_string();
        Ok(RenderedPrompt {
            text,
            template_id: id.to_string(),
            shot_count: shots.len(),
            stop: t.file.stop.clone(),
            max_tokens: t.file.max_tokens,
            answer_prefix,
            query_block,
        })
    }

    /// Query-block variables for an annotation prompt.
    pub fn query_vars(spec: &TaskSpec, query: &Query) -> Result<Vars, PromptError> {
        if query.text.trim().is_empty() {
            return Err(PromptError::EmptyInput);
        }
        let mut q = vars([("text", text(&query.text))]);
        if spec.kind == TaskKind::RelationExtraction {
            let head = query.head.as_deref().ok_or_else(|| PromptError::MissingField("head".into()))?;
            let tail = query.tail.as_deref().ok_or_else(|| PromptError::MissingField("tail".into()))?;
            q.insert("head".into(), text(head));
            q.insert("tail".into(), text(tail));
            if let Some(m) = mark_entities(&query.text, head, tail) {
                q.insert("marked_text".into(), text(m));
            }
        }
        Ok(q)
    }

    pub fn render_pgda(&self, spec: &TaskSpec, query: &Query, variant: &str) -> Result<RenderedPrompt, PromptError> {
        let t = self.template(variant, spec.kind, &[Family::Pgda])?;
        let q = Self::query_vars(spec, query)?;
        let shots = self.shot_vars(t, spec, None);
        self.assemble(t, &spec.label_space, &Self::globals(spec), &shots, &q)
    }

    pub fn render_pgdg_span(
        &self,
        spec: &TaskSpec,
        label: &str,
        count: usize,
        variant: &str,
    ) -> Result<RenderedPrompt, PromptError> {
        if count == 0 {
            return Err(PromptError::InvalidCount);
        }
        let t = self.template(variant, spec.kind, &[Family::Span])?;
        let space = &spec.label_space;
        let label = space.canonical(label).ok_or_else(|| PromptError::UnknownLabel(label.to_string()))?;
        let mut g = Self::globals(spec);
        g.insert("count".into(), text(count.to_string()));
        let mut q = Vars::new();
        let def = space.definition(label).map(text);
        match spec.kind {
            TaskKind::Classification => {
                q.insert("label".into(), text(label));
            }
            TaskKind::RelationExtraction => {
                q.insert("relation".into(), text(label));
                if let Some(d) = def {
                    g.insert("relation_definition".into(), d);
                }
            }
            TaskKind::Ner => {
                q.insert("entity_type".into(), text(label));
                if let Some(d) = def {
                    g.insert("entity_type_definition".into(), d);
                }
            }
            TaskKind::Aste => {
                q.insert("sentiment".into(), text(label));
            }
        }
        g.extend(q.clone());
        let shots = self.shot_vars(t, spec, Some(label));
        q.insert("index".into(), text((shots.len() + 1).to_string()));
        self.assemble(t, space, &g, &shots, &q)
    }

    pub fn render_sentence_gen(
        &self,
        spec: &TaskSpec,
        seed: &SeedPayload,
        variant: &str,
    ) -> Result<RenderedPrompt, PromptError> {
        if seed.is_empty() {
            return Err(PromptError::EmptySpans);
        }
        if seed.kind() != spec.kind {
            return Err(PromptError::KindMismatch { expected: spec.kind, found: seed.kind() });
        }
        let t = self.template(variant, spec.kind, &[Family::Sentence])?;
        let (q, focus) = match seed {
            SeedPayload::Label { label, entity } => {
                let mut q = vars([("label", text(label))]);
                if let Some(e) = entity {
                    q.insert("entity".into(), text(e));
                }
                (q, Some(label.as_str()))
            }
            SeedPayload::Pair { head, tail, relation } => (
                vars([("head", text(head)), ("tail", text(tail)), ("relation", text(relation))]),
                Some(relation.as_str()),
            ),
            SeedPayload::Entities { entities } => {
                let typed = entities.iter().map(|(s, ty)| (ty.clone(), s.clone())).collect();
                (vars([("entities", Value::Typed(typed))]), None)
            }
            SeedPayload::Triplets { triplets } => (vars([("triplets", Value::Triplets(triplets.clone()))]), None),
        };
        if let Some(f) = focus {
            if !spec.label_space.contains(f) {
                return Err(PromptError::UnknownLabel(f.to_string()));
            }
        }
        let mut g = Self::globals(spec);
        g.extend(q.clone());
        let shots = self.shot_vars(t, spec, focus);
        self.assemble(t, &spec.label_space, &g, &shots, &q)
    }

    pub fn render_ner_type_pass(
        &self,
        spec: &TaskSpec,
        entity_type: &str,
        definition: &str,
        sentence: &str,
    ) -> Result<RenderedPrompt, PromptError> {
        self.render_ner_type_pass_with(spec, entity_type, definition, sentence, "crossner-type-pass")
    }

    pub fn render_ner_type_pass_with(
        &self,
        spec: &TaskSpec,
        entity_type: &str,
        definition: &str,
        sentence: &str,
        variant: &str,
    ) -> Result<RenderedPrompt, PromptError> {
        let t = self.template(variant, TaskKind::Ner, &[Family::TypePass])?;
        let ty = spec
            .label_space
            .canonical(entity_type)
            .ok_or_else(|| PromptError::UnknownLabel(entity_type.to_string()))?;
        if definition.trim().is_empty() {
            return Err(PromptError::MissingField("entity_type_definition".into()));
        }
        if sentence.trim().is_empty() {
            return Err(PromptError::EmptyInput);
        }
        let mut g = Self::globals(spec);
        g.insert("entity_type".into(), text(ty));
        g.insert("entity_type_definition".into(), text(definition.trim()));
        let q = vars([("text", text(sentence))]);
        let shots = self.shot_vars(t, spec, Some(ty));
        self.assemble(t, &spec.label_space, &g, &shots, &q)
    }

    pub fn render_disambiguation(
        &self,
        sentence: &str,
        entity: &str,
        candidates: &[String],
        shots: &[DisambiguationShot],
    ) -> Result<RenderedPrompt, PromptError> {
        self.render_disambiguation_with(sentence, entity, candidates, shots, "crossner-disambiguation")
    }

    pub fn render_disambiguation_with(
        &self,
        sentence: &str,
        entity: &str,
        candidates: &[String],
        shots: &[DisambiguationShot],
        variant: &str,
    ) -> Result<RenderedPrompt, PromptError> {
        let t = self.template(variant, TaskKind::Ner, &[Family::Disambiguation])?;
        if candidates.len() < 2 {
            return Err(PromptError::TooFewCandidates(candidates.len()));
        }
        if align_spans(sentence, entity).is_none() {
            return Err(PromptError::EntityNotInSentence(entity.to_string()));
        }
        let space = LabelSpace::new(candidates.iter().cloned())
            .map_err(|e| PromptError::Template { id: variant.into(), message: e.to_string() })?;
        let shot_vars: Vec<Vars> = shots
            .iter()
            .map(|s| {
                vars([
                    ("text", text(&s.text)),
                    ("entity", text(&s.entity)),
                    ("candidates", Value::List(s.candidates.clone())),
                    ("label", text(&s.label)),
                ])
            })
            .collect();
        let q = vars([
            ("text", text(sentence)),
            ("entity", text(entity)),
            ("candidates", Value::List(candidates.to_vec())),
        ]);
        self.assemble(t, &space, &Vars::new(), &shot_vars, &q)
    }

    /// The prompt that asks for an entity-type definition.
    pub fn render_definition(&self, spec: &TaskSpec, entity_type: &str) -> Result<RenderedPrompt, PromptError> {
        let id = default_variant(spec.kind, Family::Definition)
            .ok_or_else(|| PromptError::UnknownVariant(format!("no definition prompt for {}", spec.kind.as_str())))?;
        let t = self.template(id, spec.kind, &[Family::Definition])?;
        let ty = spec
            .label_space
            .canonical(entity_type)
            .ok_or_else(|| PromptError::UnknownLabel(entity_type.to_string()))?;
        let mut g = Self::globals(spec);
        g.insert("entity_type".into(), text(ty));
        self.assemble(t, &spec.label_space, &g, &[], &Vars::new())
    }

    /// Opinion/sentiment prompt for a dictionary target. `sentiment` fills the
    /// per-sentiment variant and is ignored by the others.
    pub fn render_aste_opinion(
        &self,
        spec: &TaskSpec,
        target: &str,
        sentiment: Sentiment,
        variant: &str,
    ) -> Result<RenderedPrompt, PromptError> {
        let t = self.template(variant, TaskKind::Aste, &[Family::Opinion])?;
        if target.trim().is_empty() {
            return Err(PromptError::EmptyInput);
        }
        let mut g = Self::globals(spec);
        g.insert("sentiment".into(), text(sentiment.as_str()));
        let shots = self.shot_vars(t, spec, Some(sentiment.as_str()));
        let q = vars([
            ("target", text(target)),
            ("sentiment", text(sentiment.as_str())),
            ("index", text((shots.len() + 1).to_string())),
        ]);
        self.assemble(t, &spec.label_space, &g, &shots, &q)
    }
}
