//! The small format language used by prompt templates.
//!
//! `{name}` substitutes a variable, `{name|f|g}` applies filters left to right,
//! `{{` and `}}` are literal braces, and `[[ ... ]]` is an optional segment
//! that disappears when any variable inside it is missing or renders empty.

use std::collections::BTreeMap;
use std::fmt;

use crate::model::SurfaceTriplet;

pub const PLACEHOLDERS: [&str; 14] = [
    "text",
    "label",
    "head",
    "tail",
    "relation",
    "relation_definition",
    "entity_type",
    "entity_type_definition",
    "entities",
    "target",
    "opinion",
    "sentiment",
    "domain",
    "count",
];

/// Names beyond the core set, needed by the disambiguation, marking and
/// numbered-list prompts.
pub const EXTRA_PLACEHOLDERS: [&str; 7] =
    ["labels", "entity", "candidates", "index", "marked_text", "triplets", "definition"];

const TEXT_FILTERS: [&str; 4] = ["lower", "upper", "capitalize", "plural"];
const LIST_STYLES: [&str; 7] = ["list", "comma", "and", "semi", "lines", "numbered", "typed"];
const TRIPLET_STYLES: [&str; 5] = ["indexed", "parallel", "verbose", "inline", "inline_parallel"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Value {
    Text(String),
    List(Vec<String>),
    /// `(entity_type, surface)` pairs.
    Typed(Vec<(String, String)>),
    Triplets(Vec<SurfaceTriplet>),
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

pub type Vars = BTreeMap<String, Value>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TemplateError {
    #[error("unclosed '{{' at byte {0}")]
    UnclosedBrace(usize),
    #[error("stray '}}' at byte {0}")]
    StrayBrace(usize),
    #[error("unknown placeholder {{{0}}}")]
    UnknownPlaceholder(String),
    #[error("unknown filter |{0}")]
    UnknownFilter(String),
    #[error("unclosed '[[' at byte {0}")]
    UnclosedOptional(usize),
    #[error("nested '[[' at byte {0}")]
    NestedOptional(usize),
    #[error("stray ']]' at byte {0}")]
    StrayOptional(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RenderError {
    #[error("missing field {0}")]
    MissingField(String),
    #[error("filter |{filter} does not apply to {name}")]
    FilterMismatch { name: String, filter: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Piece {
    Lit(String),
    Var { name: String, filters: Vec<String> },
    Opt(Vec<Piece>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Format {
    src: String,
    pieces: Vec<Piece>,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.src)
    }
}

fn known_name(n: &str) -> bool {
    PLACEHOLDERS.contains(&n) || EXTRA_PLACEHOLDERS.contains(&n)
}

fn known_filter(f: &str) -> bool {
    TEXT_FILTERS.contains(&f) || LIST_STYLES.contains(&f) || TRIPLET_STYLES.contains(&f)
}

impl Format {
    pub fn parse(src: &str) -> Result<Format, TemplateError> {
        let mut top: Vec<Piece> = Vec::new();
        let mut opt: Option<(usize, Vec<Piece>)> = None;
        let mut lit = String::new();
        let b = src.as_bytes();
        let mut i = 0;

        fn flush(lit: &mut String, out: &mut Vec<Piece>) {
            if !lit.is_empty() {
                out.push(Piece::Lit(std::mem::take(lit)));
            }
        }

        while i < b.len() {
            let rest = &src[i..];
            if rest.starts_with("{{") {
                lit.push('{');
                i += 2;
            } else if rest.starts_with("}}") {
                lit.push('}');
                i += 2;
            } else if rest.starts_with("[[") {
                if opt.is_some() {
                    return Err(TemplateError::NestedOptional(i));
                }
                flush(&mut lit, &mut top);
                opt = Some((i, Vec::new()));
                i += 2;
            } else if rest.starts_with("]]") {
                let Some((_, mut inner)) = opt.take() else {
                    return Err(TemplateError::StrayOptional(i));
                };
                flush(&mut lit, &mut inner);
                top.push(Piece::Opt(inner));
                i += 2;
            } else if b[i] == b'{' {
                let close = rest.find('}').ok_or(TemplateError::UnclosedBrace(i))?;
                let body = &rest[1..close];
                let mut parts = body.split('|').map(str::trim);
                let name = parts.next().unwrap_or_default().to_string();
                if !known_name(&name) {
                    return Err(TemplateError::UnknownPlaceholder(name));
                }
                let filters: Vec<String> = parts.map(str::to_string).collect();
                if let Some(f) = filters.iter().find(|f| !known_filter(f)) {
                    return Err(TemplateError::UnknownFilter(f.clone()));
                }
                let target = match opt.as_mut() {
                    Some((_, inner)) => inner,
                    None => &mut top,
                };
                flush(&mut lit, target);
                target.push(Piece::Var { name, filters });
                i += close + 1;
            } else if b[i] == b'}' {
                return Err(TemplateError::StrayBrace(i));
            } else {
                let ch = rest.chars().next().expect("non-empty");
                lit.push(ch);
                i += ch.len_utf8();
            }
        }
        if let Some((at, _)) = opt {
            return Err(TemplateError::UnclosedOptional(at));
        }
        flush(&mut lit, &mut top);
        Ok(Format { src: src.to_string(), pieces: top })
    }

    pub fn source(&self) -> &str {
        &self.src
    }

    pub fn is_empty(&self) -> bool {
        self.src.is_empty()
    }

    /// Every placeholder name used, in order of appearance.
    pub fn placeholders(&self) -> Vec<&str> {
        fn walk<'a>(ps: &'a [Piece], out: &mut Vec<&'a str>) {
            for p in ps {
                match p {
                    Piece::Var { name, .. } => out.push(name),
                    Piece::Opt(inner) => walk(inner, out),
                    Piece::Lit(_) => {}
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.pieces, &mut out);
        out
    }

    /// Renders with `local` shadowing `global`.
    pub fn render(&self, local: &Vars, global: &Vars) -> Result<String, RenderError> {
        let lookup = |n: &str| local.get(n).or_else(|| global.get(n));
        let mut out = String::new();
        for p in &self.pieces {
            match p {
                Piece::Lit(s) => out.push_str(s),
                Piece::Var { name, filters } => {
                    let v = lookup(name).ok_or_else(|| RenderError::MissingField(name.clone()))?;
                    out.push_str(&apply(name, v, filters)?);
                }
                Piece::Opt(inner) => {
                    let mut seg = String::new();
                    let mut keep = true;
                    for q in inner {
                        match q {
                            Piece::Lit(s) => seg.push_str(s),
                            Piece::Var { name, filters } => match lookup(name) {
                                Some(v) => {
                                    let r = apply(name, v, filters)?;
                                    if r.is_empty() {
                                        keep = false;
                                    }
                                    seg.push_str(&r);
                                }
                                None => keep = false,
                            },
                            Piece::Opt(_) => unreachable!("nesting rejected at parse"),
                        }
                    }
                    if keep {
                        out.push_str(&seg);
                    }
                }
            }
        }
        Ok(out)
    }
}

pub fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// English plural of the last word, with a few label-specific irregulars.
pub fn plural(s: &str) -> String {
    let (head, last) = match s.rfind(' ') {
        Some(i) => (&s[..=i], &s[i + 1..]),
        None => ("", s),
    };
    let lower = last.to_lowercase();
    let p = match lower.as_str() {
        "person" => "people".to_string(),
        "misc" => "miscellaneous entities".to_string(),
        "" => String::new(),
        _ if lower.ends_with("ics") => last.to_string(),
        _ if lower.ends_with('s')
            || lower.ends_with('x')
            || lower.ends_with('z')
            || lower.ends_with("ch")
            || lower.ends_with("sh") =>
        {
            format!("{last}es")
        }
        _ if lower.ends_with('y') && !matches!(lower.chars().rev().nth(1), Some('a' | 'e' | 'i' | 'o' | 'u')) => {
            format!("{}ies", &last[..last.len() - 1])
        }
        _ => format!("{last}s"),
    };
    format!("{head}{p}")
}

fn text_filter(name: &str, s: String, f: &str) -> Result<String, RenderError> {
    Ok(match f {
        "lower" => s.to_lowercase(),
        "upper" => s.to_uppercase(),
        "capitalize" => capitalize(&s),
        "plural" => plural(&s),
        _ => return Err(RenderError::FilterMismatch { name: name.into(), filter: f.into() }),
    })
}

fn join_list(items: &[String], style: &str) -> String {
    match style {
        "comma" => items.join(", "),
        "semi" => items.join("; "),
        "lines" => items.join("\n"),
        "numbered" => items.iter().enumerate().map(|(i, s)| format!("{}. {s}", i + 1)).collect::<Vec<_>>().join("\n"),
        "and" => match items {
            [] => String::new(),
            [one] => one.clone(),
            [init @ .., last] => format!("{} and {last}", init.join(", ")),
        },
        _ => {
            if items.is_empty() {
                "None".to_string()
            } else {
                items.iter().map(|s| format!("{s};")).collect::<Vec<_>>().join(" ")
            }
        }
    }
}

fn triplets(ts: &[SurfaceTriplet], style: &str) -> String {
    if ts.is_empty() {
        return match style {
            "parallel" => "Target: None".to_string(),
            "inline_parallel" => "Target: None;".to_string(),
            "inline" => "Target0: None;".to_string(),
            _ => "Target0: None".to_string(),
        };
    }
    let semi = |v: Vec<&str>| v.iter().map(|s| format!("{s};")).collect::<Vec<_>>().join(" ");
    match style {
        "indexed" => ts
            .iter()
            .enumerate()
            .map(|(i, t)| format!("Target{i}: {}; Opinion{i}: {}; Sentiment{i}: {}", t.target, t.opinion, t.sentiment))
            .collect::<Vec<_>>()
            .join("\n"),
        "verbose" => ts
            .iter()
            .enumerate()
            .map(|(i, t)| {
                format!(
                    "Target{i}: is {}. Its opinion span is {}. Its sentiment is {}.",
                    t.target, t.opinion, t.sentiment
                )
            })
            .collect::<Vec<_>>()
            .join("\n"),
        "parallel" | "inline_parallel" => {
            let tg = semi(ts.iter().map(|t| t.target.as_str()).collect());
            let op = semi(ts.iter().map(|t| t.opinion.as_str()).collect());
            let se = semi(ts.iter().map(|t| t.sentiment.as_str()).collect());
            let sep = if style == "parallel" { "\n" } else { " " };
            format!("Target: {tg}{sep}Opinion: {op}{sep}Sentiment: {se}")
        }
        _ => ts
            .iter()
            .enumerate()
            .map(|(i, t)| format!("Target{i}: {}; Opinion{i}: {}; Sentiment{i}: {};", t.target, t.opinion, t.sentiment))
            .collect::<Vec<_>>()
            .join(" "),
    }
}

fn apply(name: &str, v: &Value, filters: &[String]) -> Result<String, RenderError> {
    let mismatch = |f: &str| RenderError::FilterMismatch { name: name.into(), filter: f.into() };
    match v {
        Value::Text(s) => {
            let mut s = s.clone();
            for f in filters {
                s = text_filter(name, s, f)?;
            }
            Ok(s)
        }
        Value::List(_) | Value::Typed(_) => {
            let mut style = "list";
            let mut per_item: Vec<&str> = Vec::new();
            for f in filters {
                if LIST_STYLES.contains(&f.as_str()) {
                    style = f;
                } else if TEXT_FILTERS.contains(&f.as_str()) {
                    per_item.push(f);
                } else {
                    return Err(mismatch(f));
                }
            }
            let items: Vec<String> = match v {
                Value::List(items) => {
                    if style == "typed" {
                        return Err(mismatch("typed"));
                    }
                    items.clone()
                }
                Value::Typed(pairs) if style == "typed" => {
                    if pairs.is_empty() {
                        return Ok("None".to_string());
                    }
                    let mut out = Vec::with_capacity(pairs.len());
                    for (t, s) in pairs {
                        let mut t = t.clone();
                        for f in &per_item {
                            t = text_filter(name, t, f)?;
                        }
                        out.push(format!("{t}: {s};"));
                    }
                    return Ok(out.join(" "));
                }
                Value::Typed(pairs) => pairs.iter().map(|(_, s)| s.clone()).collect(),
                _ => unreachable!(),
            };
            let mut mapped = Vec::with_capacity(items.len());
            for it in items {
                let mut it = it;
                for f in &per_item {
                    it = text_filter(name, it, f)?;
                }
                mapped.push(it);
            }
            Ok(join_list(&mapped, style))
        }
        Value::Triplets(ts) => {
            let mut style = "inline";
            for f in filters {
                if TRIPLET_STYLES.contains(&f.as_str()) {
                    style = f;
                } else {
                    return Err(mismatch(f));
                }
            }
            Ok(triplets(ts, style))
        }
    }
}
