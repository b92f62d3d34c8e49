//! Task taxonomy, label spaces and the annotation records shared by every pipeline.
//!
//! Offsets are byte offsets into the owning sentence and always fall on UTF-8
//! character boundaries. ASTE index lists refer to [`crate::tokenize`] tokens.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::tokenize::tokenize;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("label space is empty")]
    EmptyLabelSpace,
    #[error("label {0:?} is blank")]
    BlankLabel(String),
    #[error("duplicate label {0:?} (labels compare case-insensitively)")]
    DuplicateLabel(String),
    #[error("definition given for unknown label {0:?}")]
    DefinitionForUnknownLabel(String),
    #[error("shot {index} is a {found} annotation but the task is {expected}")]
    ShotKindMismatch { index: usize, expected: TaskKind, found: TaskKind },
    #[error("shot {index} is invalid: {violations}")]
    InvalidShot { index: usize, violations: String },
    #[error("unknown task kind {0:?}")]
    UnknownKind(String),
    #[error("unknown sentiment {0:?}")]
    UnknownSentiment(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Classification,
    RelationExtraction,
    Ner,
    Aste,
}

impl TaskKind {
    pub const ALL: [TaskKind; 4] =
        [TaskKind::Classification, TaskKind::RelationExtraction, TaskKind::Ner, TaskKind::Aste];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Classification => "classification",
            TaskKind::RelationExtraction => "relation_extraction",
            TaskKind::Ner => "ner",
            TaskKind::Aste => "aste",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "classification" | "sst2" => Ok(TaskKind::Classification),
            "relation_extraction" | "relation" | "re" | "fewrel" => Ok(TaskKind::RelationExtraction),
            "ner" | "crossner" => Ok(TaskKind::Ner),
            "aste" => Ok(TaskKind::Aste),
            _ => Err(ModelError::UnknownKind(s.to_string())),
        }
    }
}

/// Comparison key for labels: trimmed and case-folded.
pub fn label_key(s: &str) -> String {
    s.trim().to_lowercase()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawLabelSpace", into = "RawLabelSpace")]
pub struct LabelSpace {
    labels: Vec<String>,
    definitions: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
struct RawLabelSpace {
    labels: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    definitions: BTreeMap<String, String>,
}

impl TryFrom<RawLabelSpace> for LabelSpace {
    type Error = ModelError;

    fn try_from(raw: RawLabelSpace) -> Result<Self, Self::Error> {
        LabelSpace::with_definitions(raw.labels, raw.definitions)
    }
}

impl From<LabelSpace> for RawLabelSpace {
    fn from(ls: LabelSpace) -> Self {
        RawLabelSpace { labels: ls.labels, definitions: ls.definitions }
    }
}

impl LabelSpace {
    pub fn new<I, S>(labels: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::with_definitions(labels.into_iter().map(Into::into).collect(), BTreeMap::new())
    }

    /// Definition keys are matched case-insensitively and stored under the
    /// canonical label spelling.
    pub fn with_definitions(labels: Vec<String>, definitions: BTreeMap<String, String>) -> Result<Self, ModelError> {
        if labels.is_empty() {
            return Err(ModelError::EmptyLabelSpace);
        }
        let mut seen = std::collections::HashSet::new();
        let mut clean = Vec::with_capacity(labels.len());
        for l in labels {
            let t = l.trim();
            if t.is_empty() {
                return Err(ModelError::BlankLabel(l));
            }
            if !seen.insert(label_key(t)) {
                return Err(ModelError::DuplicateLabel(l));
            }
            clean.push(t.to_string());
        }
        let mut space = LabelSpace { labels: clean, definitions: BTreeMap::new() };
        for (k, v) in definitions {
            let canon =
                space.canonical(&k).ok_or_else(|| ModelError::DefinitionForUnknownLabel(k.clone()))?.to_string();
            space.definitions.insert(canon, v);
        }
        Ok(space)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(String::as_str)
    }

    /// The declared spelling of `s`, if `s` names a label.
    pub fn canonical(&self, s: &str) -> Option<&str> {
        let key = label_key(s);
        self.labels.iter().find(|l| label_key(l) == key).map(String::as_str)
    }

    pub fn contains(&self, s: &str) -> bool {
        self.canonical(s).is_some()
    }

    pub fn index_of(&self, s: &str) -> Option<usize> {
        let key = label_key(s);
        self.labels.iter().position(|l| label_key(l) == key)
    }

    pub fn definition(&self, label: &str) -> Option<&str> {
        let canon = self.canonical(label)?;
        self.definitions.get(canon).map(String::as_str)
    }

    pub fn definitions(&self) -> &BTreeMap<String, String> {
        &self.definitions
    }

    pub fn set_definition(&mut self, label: &str, definition: impl Into<String>) -> bool {
        match self.canonical(label).map(str::to_string) {
            Some(c) => {
                self.definitions.insert(c, definition.into());
                true
            }
            None => false,
        }
    }

    /// A label space restricted to `subset`, keeping this space's order and definitions.
    pub fn restricted<'a>(&self, subset: impl IntoIterator<Item = &'a str>) -> Option<LabelSpace> {
        let keys: Vec<String> = subset.into_iter().map(label_key).collect();
        let labels: Vec<String> = self.labels.iter().filter(|l| keys.contains(&label_key(l))).cloned().collect();
        let defs = self.definitions.iter().filter(|(k, _)| labels.contains(k)).map(|(k, v)| (k.clone(), v.clone()));
        LabelSpace::with_definitions(labels.clone(), defs.collect()).ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sentiment {
    Positive,
    Negative,
    Neutral,
}

impl Sentiment {
    pub const ALL: [Sentiment; 3] = [Sentiment::Positive, Sentiment::Negative, Sentiment::Neutral];

    pub fn as_str(self) -> &'static str {
        match self {
            Sentiment::Positive => "positive",
            Sentiment::Negative => "negative",
            Sentiment::Neutral => "neutral",
        }
    }

    /// Three-letter code used by index-based ASTE files.
    pub fn code(self) -> &'static str {
        match self {
            Sentiment::Positive => "POS",
            Sentiment::Negative => "NEG",
            Sentiment::Neutral => "NEU",
        }
    }
}

impl fmt::Display for Sentiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sentiment {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "positive" | "pos" => Ok(Sentiment::Positive),
            "negative" | "neg" => Ok(Sentiment::Negative),
            "neutral" | "neu" => Ok(Sentiment::Neutral),
            _ => Err(ModelError::UnknownSentiment(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EntitySpan {
    pub surface: String,
    pub start: usize,
    pub end: usize,
    pub entity_type: String,
}

impl EntitySpan {
    pub fn new(sentence: &str, start: usize, end: usize, entity_type: impl Into<String>) -> Option<Self> {
        let surface = sentence.get(start..end)?.to_string();
        Some(EntitySpan { surface, start, end, entity_type: entity_type.into() })
    }

    pub fn overlaps(&self, other: &EntitySpan) -> bool {
        self.start < other.end && other.start < self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Mention {
    pub surface: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offsets: Option<(usize, usize)>,
}

impl Mention {
    pub fn new(surface: impl Into<String>) -> Self {
        Mention { surface: surface.into(), offsets: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RelationInstance {
    pub sentence: String,
    pub head: Mention,
    pub tail: Mention,
    pub relation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AsteTriplet {
    pub target: Vec<usize>,
    pub opinion: Vec<usize>,
    pub sentiment: Sentiment,
    pub target_surface: String,
    pub opinion_surface: String,
}

impl AsteTriplet {
    /// Builds a triplet whose surfaces are read off the sentence tokens.
    pub fn from_indices(sentence: &str, target: Vec<usize>, opinion: Vec<usize>, sentiment: Sentiment) -> Option<Self> {
        let toks = tokenize(sentence);
        let target_surface = joined_tokens(&toks, &target)?;
        let opinion_surface = joined_tokens(&toks, &opinion)?;
        Some(AsteTriplet { target, opinion, sentiment, target_surface, opinion_surface })
    }
}

/// A triplet known only by its surfaces, as read from a completion.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SurfaceTriplet {
    pub target: String,
    pub opinion: String,
    pub sentiment: Sentiment,
}

impl SurfaceTriplet {
    pub fn new(target: impl Into<String>, opinion: impl Into<String>, sentiment: Sentiment) -> Self {
        SurfaceTriplet { target: target.into(), opinion: opinion.into(), sentiment }
    }
}

impl From<&AsteTriplet> for SurfaceTriplet {
    fn from(t: &AsteTriplet) -> Self {
        SurfaceTriplet::new(t.target_surface.clone(), t.opinion_surface.clone(), t.sentiment)
    }
}

/// The structured content a generated sentence must carry.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SeedPayload {
    /// Classification: a label, plus a dictionary entity for DADG reviews.
    Label {
        label: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        entity: Option<String>,
    },
    Pair {
        head: String,
        tail: String,
        relation: String,
    },
    /// `(surface, entity_type)` pairs.
    Entities {
        entities: Vec<(String, String)>,
    },
    Triplets {
        triplets: Vec<SurfaceTriplet>,
    },
}

impl SeedPayload {
    pub fn is_empty(&self) -> bool {
        match self {
            SeedPayload::Label { label, .. } => label.trim().is_empty(),
            SeedPayload::Pair { head, tail, relation } => {
                head.trim().is_empty() || tail.trim().is_empty() || relation.trim().is_empty()
            }
            SeedPayload::Entities { entities } => entities.is_empty(),
            SeedPayload::Triplets { triplets } => triplets.is_empty(),
        }
    }

    pub fn kind(&self) -> TaskKind {
        match self {
            SeedPayload::Label { .. } => TaskKind::Classification,
            SeedPayload::Pair { .. } => TaskKind::RelationExtraction,
            SeedPayload::Entities { .. } => TaskKind::Ner,
            SeedPayload::Triplets { .. } => TaskKind::Aste,
        }
    }
}

fn joined_tokens(toks: &[crate::tokenize::Token<'_>], idx: &[usize]) -> Option<String> {
    if idx.is_empty() {
        return None;
    }
    let parts: Option<Vec<&str>> = idx.iter().map(|&i| toks.get(i).map(|t| t.text)).collect();
    Some(parts?.join(" "))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Annotation {
    Classification {
        text: String,
        label: String,
    },
    #[serde(rename = "relation_extraction")]
    Relation(RelationInstance),
    Ner {
        sentence: String,
        spans: Vec<EntitySpan>,
    },
    Aste {
        sentence: String,
        triplets: Vec<AsteTriplet>,
    },
}

impl Annotation {
    pub fn kind(&self) -> TaskKind {
        match self {
            Annotation::Classification { .. } => TaskKind::Classification,
            Annotation::Relation(_) => TaskKind::RelationExtraction,
            Annotation::Ner { .. } => TaskKind::Ner,
            Annotation::Aste { .. } => TaskKind::Aste,
        }
    }

    /// The input text: review text or sentence.
    pub fn text(&self) -> &str {
        match self {
            Annotation::Classification { text, .. } => text,
            Annotation::Relation(r) => &r.sentence,
            Annotation::Ner { sentence, .. } | Annotation::Aste { sentence, .. } => sentence,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Pgda,
    Pgdg,
    Dadg,
    Pgi,
    Gold,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AnnotatedInstance {
    #[serde(flatten)]
    pub annotation: Annotation,
    pub provenance: Provenance,
}

impl AnnotatedInstance {
    pub fn new(annotation: Annotation, provenance: Provenance) -> Self {
        AnnotatedInstance { annotation, provenance }
    }

    pub fn kind(&self) -> TaskKind {
        self.annotation.kind()
    }

    pub fn text(&self) -> &str {
        self.annotation.text()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FewShotExample {
    pub input_text: String,
    pub annotation: AnnotatedInstance,
}

impl FewShotExample {
    pub fn new(annotation: Annotation) -> Self {
        FewShotExample {
            input_text: annotation.text().to_string(),
            annotation: AnnotatedInstance::new(annotation, Provenance::Gold),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub label_space: LabelSpace,
    #[serde(default)]
    pub shots: Vec<FewShotExample>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain_hint: Option<String>,
}

impl TaskSpec {
    pub fn new(kind: TaskKind, label_space: LabelSpace) -> Self {
        TaskSpec { kind, label_space, shots: Vec::new(), domain_hint: None }
    }

    pub fn with_domain(mut self, domain: impl Into<String>) -> Self {
        self.domain_hint = Some(domain.into());
        self
    }

    /// Adds shots after checking each against this spec.
    pub fn with_shots(mut self, shots: Vec<FewShotExample>) -> Result<Self, ModelError> {
        for (index, shot) in shots.iter().enumerate() {
            let found = shot.annotation.kind();
            if found != self.kind {
                return Err(ModelError::ShotKindMismatch { index, expected: self.kind, found });
            }
            let verdict = validate_instance(&shot.annotation, &self);
            if !verdict.is_ok() {
                return Err(ModelError::InvalidShot { index, violations: verdict.to_string() });
            }
        }
        self.shots = shots;
        Ok(self)
    }

    pub fn shot_annotations(&self) -> impl Iterator<Item = &Annotation> {
        self.shots.iter().map(|s| &s.annotation.annotation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Head,
    Tail,
    Target,
    Opinion,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Role::Head => "head",
            Role::Tail => "tail",
            Role::Target => "target",
            Role::Opinion => "opinion",
        })
    }
}

/// One failed invariant. `code()` is the stable short name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    KindMismatch { expected: TaskKind, found: TaskKind },
    EmptyText,
    UnknownLabel(String),
    EmptySpan { span: usize },
    SpanOutOfBounds { span: usize },
    NotCharBoundary { span: usize },
    SurfaceMismatch { span: usize },
    Overlap { first: usize, second: usize },
    MentionMissing { role: Role },
    MentionOffsetMismatch { role: Role },
    EmptyIndexList { triplet: usize, role: Role },
    NonContiguous { triplet: usize, role: Role },
    IndexOutOfRange { triplet: usize, role: Role },
    TripletSurfaceMismatch { triplet: usize, role: Role },
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::KindMismatch { .. } => "kind mismatch",
            Violation::EmptyText => "empty text",
            Violation::UnknownLabel(_) => "unknown label",
            Violation::EmptySpan { .. } => "empty span",
            Violation::SpanOutOfBounds { .. } => "span out of bounds",
            Violation::NotCharBoundary { .. } => "not a character boundary",
            Violation::SurfaceMismatch { .. } => "surface mismatch",
            Violation::Overlap { .. } => "overlap",
            Violation::MentionMissing { .. } => "mention missing",
            Violation::MentionOffsetMismatch { .. } => "mention offset mismatch",
            Violation::EmptyIndexList { .. } => "empty index list",
            Violation::NonContiguous { .. } => "non-contiguous indices",
            Violation::IndexOutOfRange { .. } => "index out of range",
            Violation::TripletSurfaceMismatch { .. } => "triplet surface mismatch",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::KindMismatch { expected, found } => {
                write!(f, "kind mismatch: expected {expected}, found {found}")
            }
            Violation::UnknownLabel(l) => write!(f, "unknown label {l:?}"),
            Violation::EmptySpan { span }
            | Violation::SpanOutOfBounds { span }
            | Violation::NotCharBoundary { span }
            | Violation::SurfaceMismatch { span } => write!(f, "{} (span {span})", self.code()),
            Violation::Overlap { first, second } => write!(f, "overlap (spans {first} and {second})"),
            Violation::MentionMissing { role } | Violation::MentionOffsetMismatch { role } => {
                write!(f, "{} ({role})", self.code())
            }
            Violation::EmptyIndexList { triplet, role }
            | Violation::NonContiguous { triplet, role }
            | Violation::IndexOutOfRange { triplet, role }
            | Violation::TripletSurfaceMismatch { triplet, role } => {
                write!(f, "{} (triplet {triplet}, {role})", self.code())
            }
            Violation::EmptyText => f.write_str(self.code()),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Verdict {
    pub violations: Vec<Violation>,
}

impl Verdict {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, code: &str) -> bool {
        self.violations.iter().any(|v| v.code() == code)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("ok");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

pub fn validate_instance(inst: &AnnotatedInstance, spec: &TaskSpec) -> Verdict {
    let mut v = Vec::new();
    let found = inst.kind();
    if found != spec.kind {
        v.push(Violation::KindMismatch { expected: spec.kind, found });
        return Verdict { violations: v };
    }
    let space = &spec.label_space;
    match &inst.annotation {
        Annotation::Classification { text, label } => {
            if text.trim().is_empty() {
                v.push(Violation::EmptyText);
            }
            if !space.contains(label) {
                v.push(Violation::UnknownLabel(label.clone()));
            }
        }
        Annotation::Relation(r) => {
            if r.sentence.trim().is_empty() {
                v.push(Violation::EmptyText);
            }
            if !space.contains(&r.relation) {
                v.push(Violation::UnknownLabel(r.relation.clone()));
            }
            for (role, m) in [(Role::Head, &r.head), (Role::Tail, &r.tail)] {
                if m.surface.is_empty() || !r.sentence.contains(&m.surface) {
                    v.push(Violation::MentionMissing { role });
                } else if let Some((s, e)) = m.offsets {
                    if r.sentence.get(s..e) != Some(m.surface.as_str()) {
                        v.push(Violation::MentionOffsetMismatch { role });
                    }
                }
            }
        }
        Annotation::Ner { sentence, spans } => {
            for (i, s) in spans.iter().enumerate() {
                if s.start >= s.end {
                    v.push(Violation::EmptySpan { span: i });
                } else if s.end > sentence.len() {
                    v.push(Violation::SpanOutOfBounds { span: i });
                } else if !sentence.is_char_boundary(s.start) || !sentence.is_char_boundary(s.end) {
                    v.push(Violation::NotCharBoundary { span: i });
                } else if sentence[s.start..s.end] != s.surface {
                    v.push(Violation::SurfaceMismatch { span: i });
                }
                if !space.contains(&s.entity_type) {
                    v.push(Violation::UnknownLabel(s.entity_type.clone()));
                }
            }
            for i in 0..spans.len() {
                for j in i + 1..spans.len() {
                    let (a, b) = (&spans[i], &spans[j]);
                    if !a.is_empty() && !b.is_empty() && a.overlaps(b) {
                        v.push(Violation::Overlap { first: i, second: j });
                    }
                }
            }
        }
        Annotation::Aste { sentence, triplets } => {
            let toks = tokenize(sentence);
            for (i, t) in triplets.iter().enumerate() {
                if !space.contains(t.sentiment.as_str()) {
                    v.push(Violation::UnknownLabel(t.sentiment.to_string()));
                }
                for (role, idx, surface) in
                    [(Role::Target, &t.target, &t.target_surface), (Role::Opinion, &t.opinion, &t.opinion_surface)]
                {
                    if idx.is_empty() {
                        v.push(Violation::EmptyIndexList { triplet: i, role });
                        continue;
                    }
                    if idx.windows(2).any(|w| w[1] != w[0] + 1) {
                        v.push(Violation::NonContiguous { triplet: i, role });
                    }
                    if idx.iter().any(|&k| k >= toks.len()) {
                        v.push(Violation::IndexOutOfRange { triplet: i, role });
                        continue;
                    }
                    if joined_tokens(&toks, idx).as_deref() != Some(surface.as_str()) {
                        v.push(Violation::TripletSurfaceMismatch { triplet: i, role });
                    }
                }
            }
        }
    }
    Verdict { violations: v }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sst2() -> TaskSpec {
        TaskSpec::new(TaskKind::Classification, LabelSpace::new(["Positive", "Negative"]).unwrap())
    }

    fn ner_spec() -> TaskSpec {
        TaskSpec::new(TaskKind::Ner, LabelSpace::new(["researcher", "university", "person"]).unwrap())
    }

    #[test]
    fn label_space_rules() {
        assert_eq!(LabelSpace::new(Vec::<String>::new()), Err(ModelError::EmptyLabelSpace));
        assert!(matches!(LabelSpace::new(["Positive", " positive "]), Err(ModelError::DuplicateLabel(_))));
        let mut defs = BTreeMap::new();
        defs.insert("nope".to_string(), "x".to_string());
        assert!(matches!(
            LabelSpace::with_definitions(vec!["a".into()], defs),
            Err(ModelError::DefinitionForUnknownLabel(_))
        ));
        let ls = LabelSpace::new(["Positive", "Negative"]).unwrap();
        assert_eq!(ls.canonical("  NEGATIVE"), Some("Negative"));
        assert_eq!(ls.index_of("negative"), Some(1));
    }

    #[test]
    fn classification_shot_is_valid() {
        let inst = AnnotatedInstance::new(
            Annotation::Classification { text: "a feast for the eyes".into(), label: "Positive".into() },
            Provenance::Gold,
        );
        assert!(validate_instance(&inst, &sst2()).is_ok());
    }

    #[test]
    fn empty_span_violation() {
        let sentence = "Marvin Minsky worked .".to_string();
        let spans = vec![EntitySpan { surface: String::new(), start: 3, end: 3, entity_type: "researcher".into() }];
        let inst = AnnotatedInstance::new(Annotation::Ner { sentence, spans }, Provenance::Mock);
        let verdict = validate_instance(&inst, &ner_spec());
        assert!(verdict.has("empty span"), "{verdict}");
    }

    fn intervals_intersect(a: (usize, usize), b: (usize, usize)) -> bool {
        // brute force: any position inside both half-open intervals
        (0..16).any(|p| a.0 <= p && p < a.1 && b.0 <= p && p < b.1)
    }

    #[test]
    fn overlapping_spans_violation() {
        let sentence = "abcdefghij".to_string();
        assert!(intervals_intersect((0, 5), (3, 8)));
        let spans = vec![
            EntitySpan::new(&sentence, 0, 5, "person").unwrap(),
            EntitySpan::new(&sentence, 3, 8, "person").unwrap(),
        ];
        let inst = AnnotatedInstance::new(Annotation::Ner { sentence, spans }, Provenance::Mock);
        let verdict = validate_instance(&inst, &ner_spec());
        assert!(verdict.has("overlap"), "{verdict}");
        assert_eq!(verdict.violations.len(), 1);
    }

    #[test]
    fn overlap_matches_interval_oracle() {
        for a0 in 0..8 {
            for a1 in a0 + 1..9 {
                for b0 in 0..8 {
                    for b1 in b0 + 1..9 {
                        let a = EntitySpan { surface: String::new(), start: a0, end: a1, entity_type: String::new() };
                        let b = EntitySpan { surface: String::new(), start: b0, end: b1, entity_type: String::new() };
                        assert_eq!(a.overlaps(&b), intervals_intersect((a0, a1), (b0, b1)));
                    }
                }
            }
        }
    }

    #[test]
    fn surface_and_label_violations() {
        let sentence = "Marvin Minsky worked at MIT .".to_string();
        let spans = vec![
            EntitySpan { surface: "Marvin".into(), start: 0, end: 13, entity_type: "researcher".into() },
            EntitySpan::new(&sentence, 24, 27, "country").unwrap(),
            EntitySpan { surface: "x".into(), start: 20, end: 99, entity_type: "person".into() },
        ];
        let inst = AnnotatedInstance::new(Annotation::Ner { sentence, spans }, Provenance::Mock);
        let verdict = validate_instance(&inst, &ner_spec());
        assert!(verdict.has("surface mismatch"));
        assert!(verdict.has("unknown label"));
        assert!(verdict.has("span out of bounds"));
    }

    #[test]
    fn relation_mentions() {
        let spec = TaskSpec::new(
            TaskKind::RelationExtraction,
            LabelSpace::new(["head of government", "mountain range"]).unwrap(),
        );
        let rel = RelationInstance {
            sentence: "Chester Alan Arthur , 21st President of the United States".into(),
            head: Mention::new("United States"),
            tail: Mention { surface: "Chester Alan Arthur".into(), offsets: Some((0, 19)) },
            relation: "Head of Government".into(),
        };
        let inst = AnnotatedInstance::new(Annotation::Relation(rel.clone()), Provenance::Pgdg);
        assert!(validate_instance(&inst, &spec).is_ok());
        let mut bad = rel;
        bad.head = Mention::new("Canada");
        bad.tail.offsets = Some((1, 20));
        let verdict = validate_instance(&AnnotatedInstance::new(Annotation::Relation(bad), Provenance::Pgdg), &spec);
        assert!(verdict.has("mention missing"));
        assert!(verdict.has("mention offset mismatch"));
    }

    #[test]
    fn aste_triplets() {
        let spec = TaskSpec::new(TaskKind::Aste, LabelSpace::new(["positive", "negative", "neutral"]).unwrap());
        let s = "The biggest problem is that the box had no instructions in it .";
        let t = AsteTriplet::from_indices(s, vec![9], vec![2], Sentiment::Negative).unwrap();
        assert_eq!(t.target_surface, "instructions");
        assert_eq!(t.opinion_surface, "problem");
        let inst = AnnotatedInstance::new(
            Annotation::Aste { sentence: s.into(), triplets: vec![t.clone()] },
            Provenance::Gold,
        );
        assert!(validate_instance(&inst, &spec).is_ok());
        let mut gap = t.clone();
        gap.target = vec![8, 10];
        let mut oob = t;
        oob.opinion = vec![40];
        let inst =
            AnnotatedInstance::new(Annotation::Aste { sentence: s.into(), triplets: vec![gap, oob] }, Provenance::Gold);
        let verdict = validate_instance(&inst, &spec);
        assert!(verdict.has("non-contiguous indices"));
        assert!(verdict.has("index out of range"));
    }

    #[test]
    fn kind_mismatch() {
        let inst = AnnotatedInstance::new(Annotation::Ner { sentence: "x".into(), spans: vec![] }, Provenance::Gold);
        assert!(validate_instance(&inst, &sst2()).has("kind mismatch"));
        let err = sst2().with_shots(vec![FewShotExample::new(inst.annotation)]).unwrap_err();
        assert!(matches!(err, ModelError::ShotKindMismatch { .. }));
    }

    #[test]
    fn serde_shape() {
        let inst = AnnotatedInstance::new(
            Annotation::Classification { text: "t".into(), label: "Positive".into() },
            Provenance::Pgda,
        );
        let json = serde_json::to_string(&inst).unwrap();
        assert_eq!(json, r#"{"kind":"classification","text":"t","label":"Positive","provenance":"pgda"}"#);
        let back: AnnotatedInstance = serde_json::from_str(&json).unwrap();
        assert_eq!(back, inst);
    }
}
