//! Whitespace tokenizer with punctuation detachment.
//!
//! Tokens are split on whitespace; leading and trailing punctuation characters
//! of each whitespace-delimited chunk become tokens of their own, one character
//! per token. Punctuation inside a chunk (`Fei-Fei`, `it's`) stays attached.

/// A token borrowed from its sentence, with byte offsets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

pub fn is_punct(c: char) -> bool {
    c.is_ascii_punctuation()
        || matches!(
            c,
            '\u{2018}'
                | '\u{2019}'
                | '\u{201C}'
                | '\u{201D}'
                | '\u{2013}'
                | '\u{2014}'
                | '\u{2026}'
                | '\u{00AB}'
                | '\u{00BB}'
                | '\u{00BF}'
                | '\u{00A1}'
                | '\u{3001}'
                | '\u{3002}'
                | '\u{FF0C}'
        )
}

pub fn tokenize(sentence: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut chunk_start = None;
    for (i, c) in sentence.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = chunk_start.take() {
                split_chunk(sentence, s, i, &mut out);
            }
        } else if chunk_start.is_none() {
            chunk_start = Some(i);
        }
    }
    if let Some(s) = chunk_start {
        split_chunk(sentence, s, sentence.len(), &mut out);
    }
    out
}

fn split_chunk<'a>(sentence: &'a str, start: usize, end: usize, out: &mut Vec<Token<'a>>) {
    let chunk = &sentence[start..end];
    let mut core_start = start;
    for (i, c) in chunk.char_indices() {
        if !is_punct(c) {
            break;
        }
        let s = start + i;
        let e = s + c.len_utf8();
        out.push(Token { text: &sentence[s..e], start: s, end: e });
        core_start = e;
    }
    if core_start == end {
        return;
    }
    // trailing punctuation, collected right to left
    let mut core_end = end;
    let mut trailing = Vec::new();
    for (i, c) in sentence[core_start..end].char_indices().rev() {
        if !is_punct(c) {
            break;
        }
        let s = core_start + i;
        trailing.push(Token { text: &sentence[s..s + c.len_utf8()], start: s, end: s + c.len_utf8() });
        core_end = s;
    }
    out.push(Token { text: &sentence[core_start..core_end], start: core_start, end: core_end });
    out.extend(trailing.into_iter().rev());
}

/// Tokens joined by single spaces; the form used by space-tokenized datasets.
pub fn normalize_spacing(sentence: &str) -> String {
    tokenize(sentence).iter().map(|t| t.text).collect::<Vec<_>>().join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(s: &str) -> Vec<&str> {
        tokenize(s).into_iter().map(|t| t.text).collect()
    }

    #[test]
    fn pre_tokenized_sentence() {
        assert_eq!(texts("no instructions in it ."), ["no", "instructions", "in", "it", "."]);
    }

    #[test]
    fn empty() {
        assert!(tokenize("").is_empty());
        assert!(tokenize("   \t\n").is_empty());
    }

    #[test]
    fn comma_detached_with_offsets() {
        let s = "MIT, 1984";
        let toks = tokenize(s);
        let spans: Vec<_> = toks.iter().map(|t| (t.text, t.start, t.end)).collect();
        assert_eq!(spans, [("MIT", 0, 3), (",", 3, 4), ("1984", 5, 9)]);
        for t in toks {
            assert_eq!(&s[t.start..t.end], t.text);
        }
    }

    #[test]
    fn brackets_and_inner_punct() {
        assert_eq!(texts("(CGK) Fei-Fei it's"), ["(", "CGK", ")", "Fei-Fei", "it's"]);
        assert_eq!(texts("..."), [".", ".", "."]);
        assert_eq!(texts("\"Élisabeth Borne\"."), ["\"", "Élisabeth", "Borne", "\"", "."]);
    }

    #[test]
    fn normalize() {
        assert_eq!(normalize_spacing("good, cheap."), "good , cheap .");
    }
}
