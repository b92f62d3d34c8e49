//! Locating annotated surfaces inside their sentence.
//!
//! Matching works on token sequences, so a hit always starts and ends on a
//! token boundary. Passes, each leftmost-first: exact, case-insensitive, then
//! both again with leading/trailing punctuation tokens removed from the surface.

use std::ops::Range;

use crate::tokenize::{is_punct, tokenize, Token};

fn fold(s: &str) -> String {
    s.chars().flat_map(char::to_lowercase).collect()
}

fn find_seq(hay: &[&str], needle: &[&str], from: usize) -> Option<usize> {
    if needle.is_empty() || needle.len() > hay.len() {
        return None;
    }
    (from..=hay.len() - needle.len()).find(|&i| hay[i..i + needle.len()] == *needle)
}

fn strip_punct_tokens<'a>(toks: &'a [&'a str]) -> &'a [&'a str] {
    let all_punct = |t: &&str| t.chars().all(is_punct);
    let start = toks.iter().position(|t| !all_punct(t)).unwrap_or(toks.len());
    let end = toks.iter().rposition(|t| !all_punct(t)).map_or(start, |e| e + 1);
    &toks[start..end]
}

/// All matches of `surface` over `tokens`, as token ranges, in pass order and
/// then left to right. Only the first pass that finds anything contributes.
pub fn token_matches(tokens: &[Token<'_>], surface: &str) -> Vec<Range<usize>> {
    let hay: Vec<&str> = tokens.iter().map(|t| t.text).collect();
    let hay_folded: Vec<String> = hay.iter().map(|t| fold(t)).collect();
    let hay_folded: Vec<&str> = hay_folded.iter().map(String::as_str).collect();

    let surf_toks = tokenize(surface);
    let needle: Vec<&str> = surf_toks.iter().map(|t| t.text).collect();
    let stripped = strip_punct_tokens(&needle);

    let mut candidates: Vec<Vec<&str>> = vec![needle.clone()];
    if stripped.len() != needle.len() {
        candidates.push(stripped.to_vec());
    }
    for cand in candidates {
        if cand.is_empty() {
            continue;
        }
        let folded: Vec<String> = cand.iter().map(|t| fold(t)).collect();
        let folded: Vec<&str> = folded.iter().map(String::as_str).collect();
        for (h, n) in [(&hay, &cand), (&hay_folded, &folded)] {
            let mut out = Vec::new();
            let mut from = 0;
            while let Some(i) = find_seq(h, n, from) {
                out.push(i..i + n.len());
                from = i + 1;
            }
            if !out.is_empty() {
                return out;
            }
        }
    }
    Vec::new()
}

/// Leftmost token range matching `surface`.
pub fn align_tokens(tokens: &[Token<'_>], surface: &str) -> Option<Range<usize>> {
    token_matches(tokens, surface).into_iter().next()
}

/// Byte offsets of the first token-bounded occurrence of `surface` in `sentence`.
pub fn align_spans(sentence: &str, surface: &str) -> Option<(usize, usize)> {
    let toks = tokenize(sentence);
    let r = align_tokens(&toks, surface)?;
    Some((toks[r.start].start, toks[r.end - 1].end))
}

/// Aligns two surfaces to disjoint places, for head/tail style pairs.
/// Prefers the leftmost `a`, then the leftmost `b` that does not overlap it.
pub fn align_pair(sentence: &str, a: &str, b: &str) -> Option<((usize, usize), (usize, usize))> {
    let toks = tokenize(sentence);
    let ma = token_matches(&toks, a);
    let mb = token_matches(&toks, b);
    let (ra, rb) =
        ma.iter().find_map(|ra| mb.iter().find(|rb| rb.end <= ra.start || rb.start >= ra.end).map(|rb| (ra, rb)))?;
    let off = |r: &Range<usize>| (toks[r.start].start, toks[r.end - 1].end);
    Some((off(ra), off(rb)))
}
