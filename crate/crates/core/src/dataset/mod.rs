//! Dataset files: JSON lines for classification and relation data, CoNLL BIO
//! for NER, and the index-based ASTE line format. Plus dedup and splits.
//!
//! Emission is byte-deterministic: fixed key order, `\n` line endings, UTF-8
//! without BOM, trailing newline.

pub mod aste;
pub mod bio;

use std::collections::HashSet;
use std::fmt;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{AnnotatedInstance, Annotation, AsteTriplet, Mention, Provenance, RelationInstance, TaskKind};
use crate::tokenize::{normalize_spacing, tokenize};

use self::bio::{read_conll, spans_to_bio, validate_conll};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetFormat {
    JsonlClassification,
    JsonlRelation,
    ConllBio,
    AsteIndexed,
}

impl DatasetFormat {
    pub fn for_kind(kind: TaskKind) -> Self {
        match kind {
            TaskKind::Classification => DatasetFormat::JsonlClassification,
            TaskKind::RelationExtraction => DatasetFormat::JsonlRelation,
            TaskKind::Ner => DatasetFormat::ConllBio,
            TaskKind::Aste => DatasetFormat::AsteIndexed,
        }
    }

    pub fn kind(self) -> TaskKind {
        match self {
            DatasetFormat::JsonlClassification => TaskKind::Classification,
            DatasetFormat::JsonlRelation => TaskKind::RelationExtraction,
            DatasetFormat::ConllBio => TaskKind::Ner,
            DatasetFormat::AsteIndexed => TaskKind::Aste,
        }
    }

    /// Conventional file extension.
    pub fn extension(self) -> &'static str {
        match self {
            DatasetFormat::JsonlClassification | DatasetFormat::JsonlRelation => "jsonl",
            DatasetFormat::ConllBio => "conll",
            DatasetFormat::AsteIndexed => "txt",
        }
    }
}

/// Where an ingested file stopped making sense.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct FormatViolation {
    /// 1-based.
    pub line: usize,
    /// 0-based byte offset into the file.
    pub byte: usize,
    pub message: String,
}

impl FormatViolation {
    pub fn new(line: usize, byte: usize, message: impl Into<String>) -> Self {
        FormatViolation { line, byte, message: message.into() }
    }
}

impl fmt::Display for FormatViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {} (byte {}): {}", self.line, self.byte, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("{}format violation at {violation}", path.as_ref().map(|p| format!("{}: ", p.display())).unwrap_or_default())]
    Format { path: Option<PathBuf>, violation: FormatViolation },
    #[error("record {index}: {kind} instance in a {format:?} file")]
    KindMismatch { index: usize, kind: TaskKind, format: DatasetFormat },
    #[error("record {index} cannot be written: {message}")]
    Unencodable { index: usize, message: String },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("split ratios must be non-negative and sum to 1, got {0} and {1}")]
    BadRatios(f64, f64),
}

impl From<FormatViolation> for DatasetError {
    fn from(violation: FormatViolation) -> Self {
        DatasetError::Format { path: None, violation }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetFile {
    pub path: PathBuf,
    pub format: DatasetFormat,
    pub record_count: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ClassificationRow {
    text: String,
    label: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationRow {
    sentence: String,
    head: String,
    tail: String,
    relation: String,
}

fn unencodable(index: usize, message: impl Into<String>) -> DatasetError {
    DatasetError::Unencodable { index, message: message.into() }
}

fn single_line(index: usize, s: &str) -> Result<(), DatasetError> {
    if s.contains(['\n', '\r']) {
        return Err(unencodable(index, "line break inside the text"));
    }
    Ok(())
}

/// Re-bases token-aligned spans onto the single-space form of the sentence.
fn respace_spans(
    sentence: &str,
    spans: &[crate::model::EntitySpan],
) -> Option<(String, Vec<crate::model::EntitySpan>)> {
    let toks = tokenize(sentence);
    let norm = normalize_spacing(sentence);
    let mut starts = Vec::with_capacity(toks.len());
    let mut at = 0;
    for t in &toks {
        starts.push(at);
        at += t.text.len() + 1;
    }
    let mut out = Vec::with_capacity(spans.len());
    for s in spans {
        let a = toks.iter().position(|t| t.start == s.start)?;
        let b = toks.iter().position(|t| t.end == s.end)?;
        let (ns, ne) = (starts[a], starts[b] + toks[b].text.len());
        out.push(crate::model::EntitySpan {
            surface: norm[ns..ne].to_string(),
            start: ns,
            end: ne,
            entity_type: s.entity_type.clone(),
        });
    }
    Some((norm, out))
}

/// Serializes `instances` as `format`. NER sentences are written token by
/// token, so reading back yields the single-space form of each sentence.
pub fn emit(format: DatasetFormat, instances: &[AnnotatedInstance]) -> Result<String, DatasetError> {
    let mut out = String::new();
    for (index, inst) in instances.iter().enumerate() {
        if inst.kind() != format.kind() {
            return Err(DatasetError::KindMismatch { index, kind: inst.kind(), format });
        }
        match &inst.annotation {
            Annotation::Classification { text, label } => {
                let row = ClassificationRow { text: text.clone(), label: label.clone() };
                out.push_str(&serde_json::to_string(&row).expect("plain strings serialize"));
                out.push('\n');
            }
            Annotation::Relation(r) => {
                let row = RelationRow {
                    sentence: r.sentence.clone(),
                    head: r.head.surface.clone(),
                    tail: r.tail.surface.clone(),
                    relation: r.relation.clone(),
                };
                out.push_str(&serde_json::to_string(&row).expect("plain strings serialize"));
                out.push('\n');
            }
            Annotation::Ner { sentence, spans } => {
                let tags = spans_to_bio(sentence, spans).map_err(|e| unencodable(index, e.to_string()))?;
                if tags.is_empty() {
                    return Err(unencodable(index, "sentence has no tokens"));
                }
                for (tok, tag) in tokenize(sentence).iter().zip(&tags) {
                    out.push_str(tok.text);
                    out.push('\t');
                    out.push_str(&tag.to_string());
                    out.push('\n');
                }
                out.push('\n');
            }
            Annotation::Aste { sentence, triplets } => {
                single_line(index, sentence)?;
                if sentence.contains(aste::SEPARATOR) {
                    return Err(unencodable(index, "sentence contains the #### separator"));
                }
                out.push_str(&aste::format_line(sentence, triplets));
                out.push('\n');
            }
        }
    }
    if format == DatasetFormat::ConllBio {
        validate_conll(&out).map_err(|v| unencodable(v.line, format!("emitted BIO failed validation: {v}")))?;
    }
    Ok(out)
}

fn lines_with_offsets(text: &str) -> impl Iterator<Item = (usize, usize, &str)> {
    let mut byte = 0;
    text.split_inclusive('\n').enumerate().map(move |(n, raw)| {
        let at = byte;
        byte += raw.len();
        let l = raw.strip_suffix('\n').unwrap_or(raw);
        (n + 1, at, l.strip_suffix('\r').unwrap_or(l))
    })
}

/// Parses a file body; every record gets `provenance`.
pub fn ingest(
    format: DatasetFormat,
    text: &str,
    provenance: Provenance,
) -> Result<Vec<AnnotatedInstance>, DatasetError> {
    let text = text.strip_prefix('\u{feff}').unwrap_or(text);
    let mut out = Vec::new();
    match format {
        DatasetFormat::JsonlClassification | DatasetFormat::JsonlRelation => {
            for (line, byte, l) in lines_with_offsets(text) {
                if l.trim().is_empty() {
                    continue;
                }
                let bad = |e: serde_json::Error| {
                    FormatViolation::new(line, byte + e.column().saturating_sub(1), e.to_string())
                };
                let ann = if format == DatasetFormat::JsonlClassification {
                    let r: ClassificationRow = serde_json::from_str(l).map_err(bad)?;
                    Annotation::Classification { text: r.text, label: r.label }
                } else {
                    let r: RelationRow = serde_json::from_str(l).map_err(bad)?;
                    Annotation::Relation(RelationInstance {
                        sentence: r.sentence,
                        head: Mention::new(r.head),
                        tail: Mention::new(r.tail),
                        relation: r.relation,
                    })
                };
                out.push(AnnotatedInstance::new(ann, provenance));
            }
        }
        DatasetFormat::ConllBio => {
            for block in read_conll(text)? {
                let (sentence, spans) =
                    block.to_spans().map_err(|e| FormatViolation::new(block.line, 0, e.to_string()))?;
                out.push(AnnotatedInstance::new(Annotation::Ner { sentence, spans }, provenance));
            }
        }
        DatasetFormat::AsteIndexed => {
            for (line, byte, l) in lines_with_offsets(text) {
                if l.trim().is_empty() {
                    continue;
                }
                if let Some(p) = l.find('\r') {
                    return Err(FormatViolation::new(line, byte + p, "carriage return inside the line").into());
                }
                let (sentence, raw) = aste::parse_line(l).map_err(|(p, m)| FormatViolation::new(line, byte + p, m))?;
                let mut triplets = Vec::with_capacity(raw.len());
                for (t, o, s) in raw {
                    let trip = AsteTriplet::from_indices(sentence, t, o, s)
                        .ok_or_else(|| FormatViolation::new(line, byte, "triplet index outside the sentence"))?;
                    triplets.push(trip);
                }
                out.push(AnnotatedInstance::new(
                    Annotation::Aste { sentence: sentence.to_string(), triplets },
                    provenance,
                ));
            }
        }
    }
    Ok(out)
}

/// Normalizes NER sentences to single spacing so that a write/read cycle is
/// the identity. Other kinds are returned unchanged.
pub fn canonical_spacing(inst: &AnnotatedInstance) -> Option<AnnotatedInstance> {
    match &inst.annotation {
        Annotation::Ner { sentence, spans } => {
            let (sentence, spans) = respace_spans(sentence, spans)?;
            Some(AnnotatedInstance::new(Annotation::Ner { sentence, spans }, inst.provenance))
        }
        _ => Some(inst.clone()),
    }
}

pub fn write_file(
    path: &Path,
    format: DatasetFormat,
    instances: &[AnnotatedInstance],
) -> Result<DatasetFile, DatasetError> {
    let body = emit(format, instances)?;
    std::fs::write(path, body).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })?;
    Ok(DatasetFile { path: path.to_path_buf(), format, record_count: instances.len() })
}

pub fn read_file(
    path: &Path,
    format: DatasetFormat,
    provenance: Provenance,
) -> Result<Vec<AnnotatedInstance>, DatasetError> {
    let body = std::fs::read_to_string(path).map_err(|source| DatasetError::Io { path: path.to_path_buf(), source })?;
    ingest(format, &body, provenance).map_err(|e| match e {
        DatasetError::Format { violation, .. } => DatasetError::Format { path: Some(path.to_path_buf()), violation },
        other => other,
    })
}

/// Case-folded, whitespace-collapsed text.
pub fn normalize_text(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ").chars().flat_map(char::to_lowercase).collect()
}

fn dedup_key(inst: &AnnotatedInstance) -> (String, Annotation) {
    let mut a = inst.annotation.clone();
    match &mut a {
        Annotation::Classification { text, .. } => text.clear(),
        Annotation::Relation(r) => r.sentence.clear(),
        Annotation::Ner { sentence, .. } | Annotation::Aste { sentence, .. } => sentence.clear(),
    }
    (normalize_text(inst.text()), a)
}

/// Drops later copies of an instance whose normalized text and annotation
/// repeat an earlier one. Stable and idempotent.
pub fn dedup(instances: Vec<AnnotatedInstance>) -> Vec<AnnotatedInstance> {
    let mut seen = HashSet::new();
    instances.into_iter().filter(|i| seen.insert(dedup_key(i))).collect()
}

/// Seeded shuffle then cut: `round(n * train)` items go to train. Each side
/// keeps the input order.
pub fn split<T: Clone>(items: &[T], ratios: (f64, f64), seed: u64) -> Result<(Vec<T>, Vec<T>), DatasetError> {
    let (a, b) = ratios;
    if a < 0.0 || b < 0.0 || ((a + b) - 1.0).abs() > 1e-9 {
        return Err(DatasetError::BadRatios(a, b));
    }
    let mut idx: Vec<usize> = (0..items.len()).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let cut = ((items.len() as f64) * a).round() as usize;
    let mut train: Vec<usize> = idx[..cut].to_vec();
    let mut dev: Vec<usize> = idx[cut..].to_vec();
    train.sort_unstable();
    dev.sort_unstable();
    Ok((train.iter().map(|&i| items[i].clone()).collect(), dev.iter().map(|&i| items[i].clone()).collect()))
}
