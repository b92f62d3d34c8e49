//! Completion parsers. Every function here is total: any input yields a
//! value or a [`ParseFailure`] carrying the raw text.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{LabelSpace, Sentiment, SurfaceTriplet};
use crate::prompt::RenderedPrompt;
use crate::tokenize::is_punct;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FailureReason {
    Empty,
    NoMatch,
    MissingHead,
    MissingTail,
    LengthMismatch,
    BadSentiment,
    Grammar,
}

impl FailureReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureReason::Empty => "Empty",
            FailureReason::NoMatch => "NoMatch",
            FailureReason::MissingHead => "MissingHead",
            FailureReason::MissingTail => "MissingTail",
            FailureReason::LengthMismatch => "LengthMismatch",
            FailureReason::BadSentiment => "BadSentiment",
            FailureReason::Grammar => "Grammar",
        }
    }
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseFailure {
    pub reason: FailureReason,
    /// The text handed to the parser, verbatim.
    pub raw: String,
}

impl fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} on {:?}", self.reason, self.raw)
    }
}

impl std::error::Error for ParseFailure {}

pub type ParseOutcome<T> = Result<T, ParseFailure>;

fn fail<T>(reason: FailureReason, raw: &str) -> ParseOutcome<T> {
    Err(ParseFailure { reason, raw: raw.to_string() })
}

fn trim_punct(s: &str) -> &str {
    s.trim_matches(|c: char| c.is_whitespace() || is_punct(c))
}

fn is_none_marker(s: &str) -> bool {
    s.eq_ignore_ascii_case("none") || s.eq_ignore_ascii_case("n/a")
}

/// Strips `prefix` from the start of `s`, ignoring ASCII case.
fn strip_prefix_ci<'a>(s: &'a str, prefix: &str) -> Option<&'a str> {
    let head = s.get(..prefix.len())?;
    head.eq_ignore_ascii_case(prefix).then(|| &s[prefix.len()..])
}

fn first_nonblank_line(s: &str) -> Option<&str> {
    s.lines().find(|l| !l.trim().is_empty())
}

/// Answer-slot names a completion may repeat before the label. An echo counts
/// only when followed by punctuation or nothing.
const LABEL_ECHOES: [&str; 4] = ["sentiment", "relation", "entity type", "label"];

/// The label a completion names, in the space's canonical spelling.
pub fn parse_label<'s>(completion: &str, space: &'s LabelSpace) -> ParseOutcome<&'s str> {
    let Some(line) = first_nonblank_line(completion) else {
        return fail(FailureReason::Empty, completion);
    };
    let mut text = trim_punct(line);
    for echo in LABEL_ECHOES {
        if let Some(rest) = strip_prefix_ci(text, echo) {
            if rest.chars().next().is_none_or(is_punct) {
                text = trim_punct(rest);
                break;
            }
        }
    }
    if text.is_empty() {
        return fail(FailureReason::Empty, completion);
    }
    match space.canonical(text) {
        Some(l) => Ok(l),
        None => fail(FailureReason::NoMatch, completion),
    }
}

fn push_unique(out: &mut Vec<String>, item: &str) {
    if !item.is_empty() && !is_none_marker(item) && !out.iter().any(|x| x == item) {
        out.push(item.to_string());
    }
}

/// Semicolon-separated surfaces from the first line, in order, exact
/// duplicates and None markers removed.
pub fn parse_entity_list(completion: &str) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(line) = first_nonblank_line(completion) {
        for part in line.split(';') {
            push_unique(&mut out, part.trim());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ListMode {
    /// Only `N.` / `N)` lines count.
    #[default]
    Strict,
    /// Unnumbered non-blank lines count too.
    Lenient,
}

/// The remainder of a line after an `N.` or `N)` index, if it has one.
pub fn strip_index(line: &str) -> Option<&str> {
    let t = line.trim_start();
    let digits = t.len() - t.trim_start_matches(|c: char| c.is_ascii_digit()).len();
    if digits == 0 {
        return None;
    }
    let rest = t[digits..].trim_start();
    rest.strip_prefix('.').or_else(|| rest.strip_prefix(')'))
}

pub fn parse_numbered_list(completion: &str, mode: ListMode) -> Vec<String> {
    completion
        .lines()
        .filter_map(|l| match (strip_index(l), mode) {
            (Some(rest), _) => Some(rest.trim()),
            (None, ListMode::Lenient) => Some(l.trim()),
            (None, ListMode::Strict) => None,
        })
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

const HEAD: &str = "Head Entity:";
const TAIL: &str = "Tail Entity:";

fn find_ci(hay: &str, needle: &str) -> Option<usize> {
    let n = needle.len();
    (0..=hay.len().saturating_sub(n))
        .filter(|&i| hay.is_char_boundary(i) && hay.is_char_boundary(i + n))
        .find(|&i| hay[i..i + n].eq_ignore_ascii_case(needle))
}

fn pair_in_line(line: &str) -> ParseOutcome<(String, String)> {
    let Some(h) = find_ci(line, HEAD) else { return fail(FailureReason::MissingHead, line) };
    let after = &line[h + HEAD.len()..];
    let tail_at = find_ci(after, TAIL);
    let head_end = match (after.find(';'), tail_at) {
        (Some(s), Some(t)) => s.min(t),
        (Some(s), None) => s,
        (None, Some(t)) => t,
        (None, None) => after.len(),
    };
    let head = after[..head_end].trim();
    if head.is_empty() {
        return fail(FailureReason::MissingHead, line);
    }
    let Some(t) = tail_at else { return fail(FailureReason::MissingTail, line) };
    let tail = after[t + TAIL.len()..].trim().trim_end_matches(';').trim_end();
    if tail.is_empty() {
        return fail(FailureReason::MissingTail, line);
    }
    Ok((head.to_string(), tail.to_string()))
}

/// The first `Head Entity: …; Tail Entity: …` pair in the completion.
pub fn parse_entity_pair(completion: &str) -> ParseOutcome<(String, String)> {
    match completion.lines().find(|l| find_ci(l, HEAD).is_some()) {
        Some(line) => pair_in_line(line).map_err(|f| ParseFailure { raw: completion.to_string(), ..f }),
        None => fail(FailureReason::MissingHead, completion),
    }
}

/// One pair per line; lines without a well-formed pair are counted, not kept.
pub fn parse_entity_pairs(completion: &str) -> (Vec<(String, String)>, usize) {
    let mut pairs = Vec::new();
    let mut rejected = 0;
    for line in completion.lines().filter(|l| find_ci(l, HEAD).is_some()) {
        match pair_in_line(line) {
            Ok(p) => pairs.push(p),
            Err(_) => rejected += 1,
        }
    }
    (pairs, rejected)
}

fn sentiment(s: &str, raw: &str) -> ParseOutcome<Sentiment> {
    trim_punct(s).parse().or_else(|_| fail(FailureReason::BadSentiment, raw))
}

/// `Key{i}: value` with the key compared case-insensitively; returns (i, value).
fn keyed<'a>(part: &'a str, key: &str) -> Option<(&'a str, &'a str)> {
    let rest = strip_prefix_ci(part.trim_start(), key)?;
    let colon = rest.find(':')?;
    let idx = &rest[..colon];
    idx.chars().all(|c| c.is_ascii_digit()).then(|| (idx, rest[colon + 1..].trim()))
}

fn nonempty(s: &str, raw: &str) -> ParseOutcome<String> {
    if s.is_empty() || is_none_marker(s) {
        fail(FailureReason::Grammar, raw)
    } else {
        Ok(s.to_string())
    }
}

/// `Target{i}: t; Opinion{i}: o; Sentiment{i}: s` items in one string, with
/// consistent indices per triplet. `Target0: None` means no triplets.
pub fn parse_aste_inline(text: &str) -> ParseOutcome<Vec<SurfaceTriplet>> {
    let parts: Vec<&str> = text.split(';').map(str::trim).filter(|p| !p.is_empty()).collect();
    if parts.is_empty() {
        return fail(FailureReason::Empty, text);
    }
    if parts.len() == 1 {
        if let Some((_, v)) = keyed(parts[0], "Target") {
            if is_none_marker(trim_punct(v)) {
                return Ok(Vec::new());
            }
        }
    }
    if !parts.len().is_multiple_of(3) {
        return fail(FailureReason::Grammar, text);
    }
    let mut out = Vec::with_capacity(parts.len() / 3);
    for chunk in parts.chunks(3) {
        let (Some((i, t)), Some((j, o)), Some((k, s))) =
            (keyed(chunk[0], "Target"), keyed(chunk[1], "Opinion"), keyed(chunk[2], "Sentiment"))
        else {
            return fail(FailureReason::Grammar, text);
        };
        if i != j || j != k {
            return fail(FailureReason::Grammar, text);
        }
        out.push(SurfaceTriplet::new(nonempty(t, text)?, nonempty(o, text)?, sentiment(s, text)?));
    }
    Ok(out)
}

fn split_items(s: &str) -> Vec<&str> {
    s.split(';').map(str::trim).filter(|p| !p.is_empty()).collect()
}

fn zip_parallel(
    targets: Vec<&str>,
    opinions: Vec<&str>,
    sentiments: Vec<&str>,
    raw: &str,
) -> ParseOutcome<Vec<SurfaceTriplet>> {
    if targets.len() == 1 && is_none_marker(targets[0]) {
        return Ok(Vec::new());
    }
    if targets.len() != opinions.len() || opinions.len() != sentiments.len() {
        return fail(FailureReason::LengthMismatch, raw);
    }
    if targets.is_empty() {
        return fail(FailureReason::Grammar, raw);
    }
    let mut out = Vec::with_capacity(targets.len());
    for ((t, o), s) in targets.into_iter().zip(opinions).zip(sentiments) {
        out.push(SurfaceTriplet::new(nonempty(t, raw)?, nonempty(o, raw)?, sentiment(s, raw)?));
    }
    Ok(out)
}

/// `Target: a; b; Opinion: c; d; Sentiment: e; f;` on one line.
pub fn parse_aste_inline_parallel(text: &str) -> ParseOutcome<Vec<SurfaceTriplet>> {
    let t = text.trim();
    if t.is_empty() {
        return fail(FailureReason::Empty, text);
    }
    let Some(rest) = strip_prefix_ci(t, "Target:") else { return fail(FailureReason::Grammar, text) };
    let Some(o) = find_ci(rest, "Opinion:") else {
        return match split_items(rest).as_slice() {
            [one] if is_none_marker(one) => Ok(Vec::new()),
            _ => fail(FailureReason::Grammar, text),
        };
    };
    let targets = &rest[..o];
    let after_o = &rest[o + "Opinion:".len()..];
    let Some(s) = find_ci(after_o, "Sentiment:") else { return fail(FailureReason::Grammar, text) };
    let opinions = &after_o[..s];
    let sentiments = &after_o[s + "Sentiment:".len()..];
    zip_parallel(split_items(targets), split_items(opinions), split_items(sentiments), text)
}

fn aste_v1(text: &str) -> ParseOutcome<Vec<SurfaceTriplet>> {
    let mut out = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        if keyed(line, "Target").is_none() {
            break;
        }
        let mut got = parse_aste_inline(line)?;
        if got.is_empty() && out.is_empty() {
            return Ok(got);
        }
        out.append(&mut got);
    }
    if out.is_empty() {
        return fail(FailureReason::Grammar, text);
    }
    Ok(out)
}

fn aste_v2(text: &str) -> ParseOutcome<Vec<SurfaceTriplet>> {
    let lines: Vec<&str> = text.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    let Some(first) = lines.first() else { return fail(FailureReason::Grammar, text) };
    let Some(targets) = strip_prefix_ci(first, "Target:") else { return fail(FailureReason::Grammar, text) };
    let targets = split_items(targets);
    if targets.len() == 1 && is_none_marker(targets[0]) {
        return Ok(Vec::new());
    }
    let (Some(o), Some(s)) = (lines.get(1), lines.get(2)) else { return fail(FailureReason::Grammar, text) };
    let (Some(opinions), Some(sentiments)) = (strip_prefix_ci(o, "Opinion:"), strip_prefix_ci(s, "Sentiment:")) else {
        return fail(FailureReason::Grammar, text);
    };
    zip_parallel(targets, split_items(opinions), split_items(sentiments), text)
}

const V3_OPINION: &str = ". Its opinion span is ";
const V3_SENTIMENT: &str = ". Its sentiment is ";

fn aste_v3(text: &str) -> ParseOutcome<Vec<SurfaceTriplet>> {
    let mut out = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let Some((_, body)) = keyed(line, "Target") else { break };
        if out.is_empty() && is_none_marker(trim_punct(body)) {
            return Ok(Vec::new());
        }
        let Some(body) = strip_prefix_ci(body, "is ") else { return fail(FailureReason::Grammar, text) };
        let (Some(o), Some(s)) = (body.find(V3_OPINION), body.find(V3_SENTIMENT)) else {
            return fail(FailureReason::Grammar, text);
        };
        if s < o {
            return fail(FailureReason::Grammar, text);
        }
        let target = body[..o].trim();
        let opinion = body[o + V3_OPINION.len()..s].trim();
        let senti = body[s + V3_SENTIMENT.len()..].trim().trim_end_matches('.');
        out.push(SurfaceTriplet::new(nonempty(target, text)?, nonempty(opinion, text)?, sentiment(senti, text)?));
    }
    if out.is_empty() {
        return fail(FailureReason::Grammar, text);
    }
    Ok(out)
}

/// Triplets in one of the three annotation answer layouts: 1 indexed lines,
/// 2 parallel lists, 3 verbose sentences. Input starts at the first `Target`.
pub fn parse_aste(text: &str, variant: u8) -> ParseOutcome<Vec<SurfaceTriplet>> {
    if text.trim().is_empty() {
        return fail(FailureReason::Empty, text);
    }
    match variant {
        1 => aste_v1(text),
        2 => aste_v2(text),
        3 => aste_v3(text),
        _ => fail(FailureReason::Grammar, text),
    }
}

fn field<'a>(p: &'a str, key: &str) -> Option<&'a str> {
    strip_prefix_ci(p, key).map(str::trim)
}

/// `Sentiment: s; Target: t; Opinion: o;` on one line.
pub fn parse_sentiment_line(line: &str) -> ParseOutcome<SurfaceTriplet> {
    let parts = split_items(line);
    if parts.is_empty() {
        return fail(FailureReason::Empty, line);
    }
    match parts.as_slice() {
        [s, t, o] => match (field(s, "Sentiment:"), field(t, "Target:"), field(o, "Opinion:")) {
            (Some(s), Some(t), Some(o)) => {
                Ok(SurfaceTriplet::new(nonempty(t, line)?, nonempty(o, line)?, sentiment(s, line)?))
            }
            _ => fail(FailureReason::Grammar, line),
        },
        _ => fail(FailureReason::Grammar, line),
    }
}

/// Review texts from a list completion: `Text:` lines or numbered lines.
pub fn parse_text_items(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for line in text.lines() {
        let t = line.trim();
        let item = strip_prefix_ci(t, "Text:").or_else(|| strip_index(t));
        if let Some(item) = item {
            push_unique(&mut out, item.trim().trim_matches('"').trim());
        }
    }
    out
}

/// A single generated sentence: the first non-blank line, without a `Text:`
/// echo or wrapping quotes.
pub fn parse_sentence(completion: &str) -> ParseOutcome<String> {
    let Some(line) = first_nonblank_line(completion) else { return fail(FailureReason::Empty, completion) };
    let mut t = line.trim();
    if let Some(rest) = strip_prefix_ci(t, "Text:") {
        t = rest.trim();
    }
    let t = t.trim_matches('"').trim();
    if t.is_empty() {
        fail(FailureReason::Empty, completion)
    } else {
        Ok(t.to_string())
    }
}

/// Whitespace-normalized definition text.
pub fn parse_definition(completion: &str) -> ParseOutcome<String> {
    let t = completion.split_whitespace().collect::<Vec<_>>().join(" ");
    if t.is_empty() {
        fail(FailureReason::Empty, completion)
    } else {
        Ok(t)
    }
}

/// Generated entity names: numbered lines when present, otherwise the first
/// line split on commas and semicolons.
pub fn parse_generated_entities(completion: &str) -> Vec<String> {
    let numbered = parse_numbered_list(completion, ListMode::Strict);
    let mut out = Vec::new();
    if !numbered.is_empty() {
        for n in &numbered {
            push_unique(&mut out, n.trim_end_matches([',', ';']).trim());
        }
        return out;
    }
    if let Some(line) = first_nonblank_line(completion) {
        for part in line.split([',', ';']) {
            push_unique(&mut out, part.trim());
        }
    }
    out
}

/// The answer layout a template's completions follow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerGrammar {
    Label,
    EntityList,
    AsteIndexed,
    AsteParallel,
    AsteVerbose,
    EntityPairs,
    GeneratedEntities,
    NumberedTriplets,
    NumberedParallel,
    SentimentLines,
    TextItems,
    Sentence,
    Definition,
}

impl AnswerGrammar {
    /// Whether the parser reads the query's last line plus the completion.
    pub fn reads_prefix(self) -> bool {
        use AnswerGrammar::*;
        matches!(
            self,
            AsteIndexed
                | AsteParallel
                | AsteVerbose
                | EntityPairs
                | NumberedTriplets
                | NumberedParallel
                | SentimentLines
                | TextItems
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Parsed {
    Label { label: String },
    Entities { entities: Vec<String> },
    Pairs { pairs: Vec<(String, String)>, rejected: usize },
    Triplets { triplets: Vec<SurfaceTriplet> },
    TripletSets { sets: Vec<Vec<SurfaceTriplet>>, rejected: usize },
    Texts { texts: Vec<String> },
    Sentence { text: String },
}

fn nonempty_list(v: Vec<String>, raw: &str) -> ParseOutcome<Vec<String>> {
    if v.is_empty() {
        fail(FailureReason::Empty, raw)
    } else {
        Ok(v)
    }
}

fn numbered_sets(text: &str, item: impl Fn(&str) -> ParseOutcome<Vec<SurfaceTriplet>>) -> ParseOutcome<Parsed> {
    let items = parse_numbered_list(text, ListMode::Strict);
    let mut sets = Vec::new();
    let mut rejected = 0;
    for it in &items {
        match item(it) {
            Ok(s) if !s.is_empty() => sets.push(s),
            _ => rejected += 1,
        }
    }
    if sets.is_empty() {
        return fail(if items.is_empty() { FailureReason::Empty } else { FailureReason::Grammar }, text);
    }
    Ok(Parsed::TripletSets { sets, rejected })
}

/// Parses `completion` for `prompt` under `grammar`. Labels resolve against
/// `space`.
pub fn parse_answer(
    grammar: AnswerGrammar,
    prompt: &RenderedPrompt,
    completion: &str,
    space: &LabelSpace,
) -> ParseOutcome<Parsed> {
    let text = if grammar.reads_prefix() { prompt.answer_text(completion) } else { completion.to_string() };
    use AnswerGrammar::*;
    match grammar {
        Label => parse_label(&text, space).map(|l| Parsed::Label { label: l.to_string() }),
        EntityList => Ok(Parsed::Entities { entities: parse_entity_list(&text) }),
        AsteIndexed => parse_aste(&text, 1).map(|triplets| Parsed::Triplets { triplets }),
        AsteParallel => parse_aste(&text, 2).map(|triplets| Parsed::Triplets { triplets }),
        AsteVerbose => parse_aste(&text, 3).map(|triplets| Parsed::Triplets { triplets }),
        EntityPairs => {
            let (pairs, rejected) = parse_entity_pairs(&text);
            if pairs.is_empty() {
                return fail(FailureReason::MissingHead, &text);
            }
            Ok(Parsed::Pairs { pairs, rejected })
        }
        GeneratedEntities => {
            nonempty_list(parse_generated_entities(&text), &text).map(|entities| Parsed::Entities { entities })
        }
        NumberedTriplets => numbered_sets(&text, parse_aste_inline),
        NumberedParallel => numbered_sets(&text, parse_aste_inline_parallel),
        SentimentLines => {
            let mut triplets = Vec::new();
            let mut last_err = None;
            for line in text.lines().filter(|l| !l.trim().is_empty()) {
                match parse_sentiment_line(line) {
                    Ok(t) => triplets.push(t),
                    Err(e) => last_err = Some(e),
                }
            }
            match (triplets.is_empty(), last_err) {
                (false, _) => Ok(Parsed::Triplets { triplets }),
                (true, Some(e)) => Err(ParseFailure { raw: text.clone(), ..e }),
                (true, None) => fail(FailureReason::Empty, &text),
            }
        }
        TextItems => nonempty_list(parse_text_items(&text), &text).map(|texts| Parsed::Texts { texts }),
        Sentence => parse_sentence(&text).map(|text| Parsed::Sentence { text }),
        Definition => parse_definition(&text).map(|text| Parsed::Sentence { text }),
    }
}
