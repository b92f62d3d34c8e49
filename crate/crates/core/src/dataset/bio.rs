//! BIO tagging over [`tokenize`] tokens and the CoNLL-style file form.
//!
//! A file is one `token<TAB>tag` line per token, a blank line after every
//! sentence. Tags are `O`, `B-<type>` or `I-<type>`; an `I-` tag must continue
//! a `B-`/`I-` of the same type.

use std::fmt;
use std::ops::Range;

use crate::model::EntitySpan;
use crate::tokenize::tokenize;

use super::FormatViolation;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BioTag {
    O,
    B(String),
    I(String),
}

impl fmt::Display for BioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BioTag::O => f.write_str("O"),
            BioTag::B(t) => write!(f, "B-{t}"),
            BioTag::I(t) => write!(f, "I-{t}"),
        }
    }
}

impl BioTag {
    pub fn parse(s: &str) -> Option<BioTag> {
        let ok = |t: &str| !t.is_empty() && !t.contains(['\t', '\n', '\r']);
        match s {
            "O" => Some(BioTag::O),
            _ => {
                if let Some(t) = s.strip_prefix("B-") {
                    ok(t).then(|| BioTag::B(t.to_string()))
                } else if let Some(t) = s.strip_prefix("I-") {
                    ok(t).then(|| BioTag::I(t.to_string()))
                } else {
                    None
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BioError {
    #[error("span {0} does not start and end on token boundaries")]
    NotTokenAligned(usize),
    #[error("spans {0} and {1} overlap")]
    Overlap(usize, usize),
    #[error("entity type {0:?} cannot be written as a tag")]
    BadType(String),
    #[error("malformed BIO at token {position}: {message}")]
    MalformedBio { position: usize, message: String },
    #[error("{tags} tags for {tokens} tokens")]
    LengthMismatch { tokens: usize, tags: usize },
}

/// One tag per token of `sentence`.
pub fn spans_to_bio(sentence: &str, spans: &[EntitySpan]) -> Result<Vec<BioTag>, BioError> {
    let toks = tokenize(sentence);
    let mut tags = vec![BioTag::O; toks.len()];
    let mut owner: Vec<Option<usize>> = vec![None; toks.len()];
    for (k, s) in spans.iter().enumerate() {
        if BioTag::parse(&format!("B-{}", s.entity_type)).is_none() {
            return Err(BioError::BadType(s.entity_type.clone()));
        }
        let first = toks.iter().position(|t| t.start == s.start);
        let last = toks.iter().position(|t| t.end == s.end);
        let (Some(a), Some(b)) = (first, last) else { return Err(BioError::NotTokenAligned(k)) };
        if b < a {
            return Err(BioError::NotTokenAligned(k));
        }
        for i in a..=b {
            if let Some(prev) = owner[i] {
                return Err(BioError::Overlap(prev, k));
            }
            owner[i] = Some(k);
            tags[i] = if i == a { BioTag::B(s.entity_type.clone()) } else { BioTag::I(s.entity_type.clone()) };
        }
    }
    Ok(tags)
}

/// Token ranges and types encoded by `tags`. Rejects an `I-` that does not
/// continue an entity of the same type.
pub fn decode_tags(tags: &[BioTag]) -> Result<Vec<(Range<usize>, String)>, BioError> {
    let mut out: Vec<(Range<usize>, String)> = Vec::new();
    let mut open: Option<(usize, String)> = None;
    for (i, tag) in tags.iter().enumerate() {
        match tag {
            BioTag::O => {
                if let Some((s, t)) = open.take() {
                    out.push((s..i, t));
                }
            }
            BioTag::B(t) => {
                if let Some((s, prev)) = open.take() {
                    out.push((s..i, prev));
                }
                open = Some((i, t.clone()));
            }
            BioTag::I(t) => match &open {
                Some((_, cur)) if cur == t => {}
                Some((_, cur)) => {
                    return Err(BioError::MalformedBio {
                        position: i,
                        message: format!("I-{t} continues an entity of type {cur}"),
                    })
                }
                None => {
                    return Err(BioError::MalformedBio {
                        position: i,
                        message: format!("I-{t} without a preceding B-{t}"),
                    })
                }
            },
        }
    }
    if let Some((s, t)) = open {
        out.push((s..tags.len(), t));
    }
    Ok(out)
}

/// Inverse of [`spans_to_bio`] for the same sentence.
pub fn bio_to_spans(sentence: &str, tags: &[BioTag]) -> Result<Vec<EntitySpan>, BioError> {
    let toks = tokenize(sentence);
    if toks.len() != tags.len() {
        return Err(BioError::LengthMismatch { tokens: toks.len(), tags: tags.len() });
    }
    Ok(decode_tags(tags)?
        .into_iter()
        .map(|(r, t)| {
            let (s, e) = (toks[r.start].start, toks[r.end - 1].end);
            EntitySpan { surface: sentence[s..e].to_string(), start: s, end: e, entity_type: t }
        })
        .collect())
}

/// A sentence block as read from a file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BioSentence {
    pub tokens: Vec<String>,
    pub tags: Vec<BioTag>,
    /// 1-based line of the first token.
    pub line: usize,
}

impl BioSentence {
    /// Tokens joined by single spaces, and the spans at offsets into it.
    pub fn to_spans(&self) -> Result<(String, Vec<EntitySpan>), BioError> {
        let sentence = self.tokens.join(" ");
        let mut starts = Vec::with_capacity(self.tokens.len());
        let mut at = 0;
        for t in &self.tokens {
            starts.push(at);
            at += t.len() + 1;
        }
        let spans = decode_tags(&self.tags)?
            .into_iter()
            .map(|(r, ty)| {
                let s = starts[r.start];
                let e = starts[r.end - 1] + self.tokens[r.end - 1].len();
                EntitySpan { surface: sentence[s..e].to_string(), start: s, end: e, entity_type: ty }
            })
            .collect();
        Ok((sentence, spans))
    }
}

pub const DOCSTART: &str = "-DOCSTART-";

/// Splits a CoNLL text into sentence blocks, checking every line and tag
/// sequence. Positions in errors are 1-based lines and 0-based file bytes.
/// `-DOCSTART-` blocks are skipped.
pub fn read_conll(text: &str) -> Result<Vec<BioSentence>, FormatViolation> {
    let mut out = Vec::new();
    let mut cur = BioSentence { tokens: Vec::new(), tags: Vec::new(), line: 0 };
    let mut cur_bytes: Vec<usize> = Vec::new();
    let mut byte = 0usize;
    let finish =
        |cur: &mut BioSentence, bytes: &mut Vec<usize>, out: &mut Vec<BioSentence>| -> Result<(), FormatViolation> {
            if cur.tokens.is_empty() {
                return Ok(());
            }
            // Document boundary markers carry no sentence.
            if cur.tokens.len() == 1 && cur.tokens[0] == DOCSTART && cur.tags[0] == BioTag::O {
                cur.tokens.clear();
                cur.tags.clear();
                bytes.clear();
                return Ok(());
            }
            if let Err(BioError::MalformedBio { position, message }) = decode_tags(&cur.tags) {
                return Err(FormatViolation::new(cur.line + position, bytes[position], message));
            }
            out.push(std::mem::replace(cur, BioSentence { tokens: Vec::new(), tags: Vec::new(), line: 0 }));
            bytes.clear();
            Ok(())
        };
    for (n, raw) in text.split_inclusive('\n').enumerate() {
        let line_no = n + 1;
        let line = raw.strip_suffix('\n').unwrap_or(raw);
        if line.contains('\r') {
            return Err(FormatViolation::new(line_no, byte, "carriage return in line"));
        }
        if line.is_empty() {
            finish(&mut cur, &mut cur_bytes, &mut out)?;
        } else {
            let Some((tok, tag)) = line.split_once('\t') else {
                return Err(FormatViolation::new(line_no, byte, "expected token<TAB>tag"));
            };
            if tok.is_empty() || tok.chars().any(char::is_whitespace) {
                return Err(FormatViolation::new(line_no, byte, format!("bad token {tok:?}")));
            }
            let Some(tag) = BioTag::parse(tag) else {
                return Err(FormatViolation::new(line_no, byte + tok.len() + 1, format!("bad tag {tag:?}")));
            };
            if cur.tokens.is_empty() {
                cur.line = line_no;
            }
            cur.tokens.push(tok.to_string());
            cur.tags.push(tag);
            cur_bytes.push(byte);
        }
        byte += raw.len();
    }
    finish(&mut cur, &mut cur_bytes, &mut out)?;
    Ok(out)
}

/// Well-formedness check for an emitted or received CoNLL text. Returns the
/// sentence count.
pub fn validate_conll(text: &str) -> Result<usize, FormatViolation> {
    if !text.is_empty() && !text.ends_with("\n\n") {
        return Err(FormatViolation::new(text.lines().count(), text.len(), "file must end with a blank line"));
    }
    read_conll(text).map(|s| s.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tags(s: &str) -> Vec<BioTag> {
        s.split(' ').map(|t| BioTag::parse(t).unwrap()).collect()
    }

    #[test]
    fn docstart_blocks_skipped() {
        let b = read_conll("-DOCSTART-\tO\n\nEU\tB-ORG\nrejects\tO\n").unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!((b[0].tokens.len(), b[0].line), (2, 3));
    }

    #[test]
    fn encoding() {
        let s = "Marvin Minsky worked .";
        let spans = [EntitySpan::new(s, 0, 13, "researcher").unwrap()];
        assert_eq!(spans_to_bio(s, &spans).unwrap(), tags("B-researcher I-researcher O O"));
        assert_eq!(spans_to_bio(s, &[]).unwrap(), tags("O O O O"));
        let adj = "A B";
        let two = [EntitySpan::new(adj, 0, 1, "x").unwrap(), EntitySpan::new(adj, 2, 3, "x").unwrap()];
        assert_eq!(spans_to_bio(adj, &two).unwrap(), tags("B-x B-x"));
        assert_eq!(bio_to_spans(adj, &tags("B-x B-x")).unwrap(), two);
        let bad = [EntitySpan::new(s, 0, 3, "x").unwrap()];
        assert_eq!(spans_to_bio(s, &bad), Err(BioError::NotTokenAligned(0)));
    }

    #[test]
    fn malformed() {
        assert!(matches!(decode_tags(&tags("O I-x")), Err(BioError::MalformedBio { position: 1, .. })));
        assert!(matches!(decode_tags(&tags("B-x I-y")), Err(BioError::MalformedBio { position: 1, .. })));
        assert!(BioTag::parse("B-").is_none());
        assert!(BioTag::parse("X-y").is_none());
        assert!(BioTag::parse("B-programming language").is_some());
    }

    #[test]
    fn conll_positions() {
        let ok = "Marvin\tB-researcher\nMinsky\tI-researcher\n\nMIT\tB-university\n\n";
        assert_eq!(validate_conll(ok), Ok(2));
        let e = read_conll("a\tO\nb\tI-x\n\n").unwrap_err();
        assert_eq!((e.line, e.byte), (2, 4));
        let e = read_conll("a\tO\nb O\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(validate_conll("a\tO\n").is_err());
    }
}
