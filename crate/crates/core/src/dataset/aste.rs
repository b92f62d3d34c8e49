//! The index-based ASTE line format:
//! `sentence####[([t, ...], [o, ...], 'POS'), ...]`.

use crate::model::{AsteTriplet, Sentiment};

pub const SEPARATOR: &str = "####";

fn indices(v: &[usize]) -> String {
    let parts: Vec<String> = v.iter().map(usize::to_string).collect();
    format!("[{}]", parts.join(", "))
}

/// The triplet list, e.g. `[([9], [2], 'NEG')]`.
pub fn format_triplets(triplets: &[AsteTriplet]) -> String {
    let parts: Vec<String> = triplets
        .iter()
        .map(|t| format!("({}, {}, '{}')", indices(&t.target), indices(&t.opinion), t.sentiment.code()))
        .collect();
    format!("[{}]", parts.join(", "))
}

pub fn format_line(sentence: &str, triplets: &[AsteTriplet]) -> String {
    format!("{sentence}{SEPARATOR}{}", format_triplets(triplets))
}

/// Raw tuple as read: index lists and sentiment.
pub type RawTriplet = (Vec<usize>, Vec<usize>, Sentiment);

struct Cursor<'a> {
    s: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn ws(&mut self) {
        while self.s[self.pos..].starts_with([' ', '\t']) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: char) -> Result<(), (usize, String)> {
        self.ws();
        if self.s[self.pos..].starts_with(c) {
            self.pos += c.len_utf8();
            Ok(())
        } else {
            Err((self.pos, format!("expected {c:?}")))
        }
    }

    fn peek(&mut self, c: char) -> bool {
        self.ws();
        self.s[self.pos..].starts_with(c)
    }

    fn number(&mut self) -> Result<usize, (usize, String)> {
        self.ws();
        let rest = &self.s[self.pos..];
        let len = rest.bytes().take_while(u8::is_ascii_digit).count();
        if len == 0 {
            return Err((self.pos, "expected an index".into()));
        }
        let n = rest[..len].parse().map_err(|_| (self.pos, "index too large".to_string()))?;
        self.pos += len;
        Ok(n)
    }

    fn list(&mut self) -> Result<Vec<usize>, (usize, String)> {
        self.eat('[')?;
        let mut v = vec![self.number()?];
        while self.peek(',') {
            self.eat(',')?;
            v.push(self.number()?);
        }
        self.eat(']')?;
        Ok(v)
    }

    fn sentiment(&mut self) -> Result<Sentiment, (usize, String)> {
        self.ws();
        let q = match self.s[self.pos..].chars().next() {
            Some(q @ ('\'' | '"')) => q,
            _ => return Err((self.pos, "expected a quoted sentiment".into())),
        };
        let start = self.pos + 1;
        let Some(len) = self.s[start..].find(q) else { return Err((self.pos, "unterminated sentiment".into())) };
        let code = &self.s[start..start + len];
        let s = match code {
            "POS" => Sentiment::Positive,
            "NEG" => Sentiment::Negative,
            "NEU" => Sentiment::Neutral,
            _ => return Err((start, format!("unknown sentiment code {code:?}"))),
        };
        self.pos = start + len + 1;
        Ok(s)
    }
}

/// Parses the part after the separator. Errors carry a byte offset into `s`.
pub fn parse_triplets(s: &str) -> Result<Vec<RawTriplet>, (usize, String)> {
    let mut c = Cursor { s, pos: 0 };
    c.eat('[')?;
    let mut out = Vec::new();
    if !c.peek(']') {
        loop {
            c.eat('(')?;
            let t = c.list()?;
            c.eat(',')?;
            let o = c.list()?;
            c.eat(',')?;
            let sent = c.sentiment()?;
            c.eat(')')?;
            out.push((t, o, sent));
            if c.peek(',') {
                c.eat(',')?;
            } else {
                break;
            }
        }
    }
    c.eat(']')?;
    c.ws();
    if c.pos != s.len() {
        return Err((c.pos, "trailing characters".into()));
    }
    Ok(out)
}

/// Splits a line at the separator and parses the triplets. Errors carry a
/// byte offset into `line`.
pub fn parse_line(line: &str) -> Result<(&str, Vec<RawTriplet>), (usize, String)> {
    let Some(at) = line.find(SEPARATOR) else { return Err((0, format!("missing {SEPARATOR}"))) };
    let sentence = &line[..at];
    let rest = &line[at + SEPARATOR.len()..];
    let off = at + SEPARATOR.len();
    parse_triplets(rest).map(|t| (sentence, t)).map_err(|(p, m)| (off + p, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_line() {
        let s = "The biggest problem is that the box had no instructions in it .";
        let t = vec![
            AsteTriplet::from_indices(s, vec![9], vec![2], Sentiment::Negative).unwrap(),
            AsteTriplet::from_indices(s, vec![9], vec![8], Sentiment::Negative).unwrap(),
        ];
        let line = format_line(s, &t);
        assert_eq!(line, format!("{s}####[([9], [2], 'NEG'), ([9], [8], 'NEG')]"));
        let (sent, raw) = parse_line(&line).unwrap();
        assert_eq!(sent, s);
        assert_eq!(raw, vec![(vec![9], vec![2], Sentiment::Negative), (vec![9], vec![8], Sentiment::Negative)]);
    }

    #[test]
    fn spacing_and_errors() {
        assert_eq!(parse_triplets("[]").unwrap(), vec![]);
        assert_eq!(parse_triplets("[([3,4],[1],\"POS\")]").unwrap(), vec![(vec![3, 4], vec![1], Sentiment::Positive)]);
        assert!(parse_triplets("[([], [1], 'POS')]").is_err());
        assert!(parse_triplets("[([1], [1], 'GOOD')]").is_err());
        assert!(parse_triplets("[([1], [1], 'POS')] x").is_err());
        assert_eq!(parse_line("no separator").unwrap_err().0, 0);
        assert_eq!(parse_line("a####[(x").unwrap_err().0, 7);
    }
}
