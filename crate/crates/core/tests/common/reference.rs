// Naive reference parsers, written against the parser contract without
// sharing code with the library. Everything is done on Vec<char> with
// explicit loops. Outputs are JSON values so fixtures can compare directly.
#![allow(dead_code)]

use serde_json::{json, Value};

type Chars = Vec<char>;
type Out = Result<Value, &'static str>;

fn chars(s: &str) -> Chars {
    s.chars().collect()
}

fn string(c: &[char]) -> String {
    c.iter().collect()
}

fn punct(c: char) -> bool {
    let ascii = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";
    ascii.contains(c) || "\u{2018}\u{2019}\u{201C}\u{201D}\u{2013}\u{2014}\u{2026}\u{00AB}\u{00BB}\u{00BF}\u{00A1}\u{3001}\u{3002}\u{FF0C}".contains(c)
}

fn trim_by(c: &[char], drop: impl Fn(char) -> bool) -> Chars {
    let mut a = 0;
    let mut b = c.len();
    while a < b && drop(c[a]) {
        a += 1;
    }
    while b > a && drop(c[b - 1]) {
        b -= 1;
    }
    c[a..b].to_vec()
}

fn trim(c: &[char]) -> Chars {
    trim_by(c, char::is_whitespace)
}

fn trim_wp(c: &[char]) -> Chars {
    trim_by(c, |x| x.is_whitespace() || punct(x))
}

fn lower(c: char) -> char {
    c.to_ascii_lowercase()
}

fn starts_ci(c: &[char], prefix: &str) -> Option<Chars> {
    let p = chars(prefix);
    if c.len() < p.len() {
        return None;
    }
    for i in 0..p.len() {
        if lower(c[i]) != lower(p[i]) {
            return None;
        }
    }
    Some(c[p.len()..].to_vec())
}

fn find_ci(c: &[char], needle: &str) -> Option<usize> {
    let n = chars(needle);
    if n.len() > c.len() {
        return None;
    }
    for i in 0..=c.len() - n.len() {
        let mut same = true;
        for j in 0..n.len() {
            if lower(c[i + j]) != lower(n[j]) {
                same = false;
                break;
            }
        }
        if same {
            return Some(i);
        }
    }
    None
}

fn find_exact(c: &[char], needle: &str) -> Option<usize> {
    let n = chars(needle);
    if n.len() > c.len() {
        return None;
    }
    (0..=c.len() - n.len()).find(|&i| c[i..i + n.len()] == n[..])
}

fn split_lines(c: &[char]) -> Vec<Chars> {
    let mut out = vec![Vec::new()];
    for &x in c {
        if x == '\n' {
            out.push(Vec::new());
        } else {
            out.last_mut().unwrap().push(x);
        }
    }
    for l in out.iter_mut() {
        if l.last() == Some(&'\r') {
            l.pop();
        }
    }
    out
}

fn split_on(c: &[char], seps: &[char]) -> Vec<Chars> {
    let mut out = vec![Vec::new()];
    for &x in c {
        if seps.contains(&x) {
            out.push(Vec::new());
        } else {
            out.last_mut().unwrap().push(x);
        }
    }
    out
}

fn is_blank(c: &[char]) -> bool {
    c.iter().all(|x| x.is_whitespace())
}

fn first_line(c: &[char]) -> Option<Chars> {
    split_lines(c).into_iter().find(|l| !is_blank(l))
}

fn none_marker(c: &[char]) -> bool {
    let s: String = c.iter().map(|x| lower(*x)).collect();
    s == "none" || s == "n/a"
}

fn add_unique(out: &mut Vec<String>, item: &[char]) {
    if item.is_empty() || none_marker(item) {
        return;
    }
    let s = string(item);
    if !out.contains(&s) {
        out.push(s);
    }
}

pub fn label(input: &str, space: &[&str]) -> Out {
    let Some(line) = first_line(&chars(input)) else { return Err("Empty") };
    let mut t = trim_wp(&line);
    for echo in ["sentiment", "relation", "entity type", "label"] {
        if let Some(rest) = starts_ci(&t, echo) {
            if rest.is_empty() || punct(rest[0]) {
                t = trim_wp(&rest);
                break;
            }
        }
    }
    if t.is_empty() {
        return Err("Empty");
    }
    let key: String = string(&t).to_lowercase();
    for l in space {
        if l.to_lowercase() == key {
            return Ok(json!(l));
        }
    }
    Err("NoMatch")
}

pub fn entity_list(input: &str) -> Out {
    let mut out = Vec::new();
    if let Some(line) = first_line(&chars(input)) {
        for part in split_on(&line, &[';']) {
            add_unique(&mut out, &trim(&part));
        }
    }
    Ok(json!(out))
}

fn index_rest(line: &[char]) -> Option<Chars> {
    let mut i = 0;
    while i < line.len() && line[i].is_whitespace() {
        i += 1;
    }
    let d = i;
    while i < line.len() && line[i].is_ascii_digit() {
        i += 1;
    }
    if i == d {
        return None;
    }
    while i < line.len() && line[i].is_whitespace() {
        i += 1;
    }
    if i < line.len() && (line[i] == '.' || line[i] == ')') {
        Some(line[i + 1..].to_vec())
    } else {
        None
    }
}

fn numbered_items(input: &str, lenient: bool) -> Vec<String> {
    let mut out = Vec::new();
    for line in split_lines(&chars(input)) {
        let item = match index_rest(&line) {
            Some(r) => trim(&r),
            None if lenient => trim(&line),
            None => continue,
        };
        if !item.is_empty() {
            out.push(string(&item));
        }
    }
    out
}

pub fn numbered_list(input: &str, variant: &str) -> Out {
    Ok(json!(numbered_items(input, variant == "lenient")))
}

fn pair_line(line: &[char]) -> Result<(String, String), &'static str> {
    let Some(h) = find_ci(line, "head entity:") else { return Err("MissingHead") };
    let after = &line[h + 12..];
    let tail_at = find_ci(after, "tail entity:");
    let mut end = after.len();
    if let Some(p) = after.iter().position(|x| *x == ';') {
        end = end.min(p);
    }
    if let Some(t) = tail_at {
        end = end.min(t);
    }
    let head = trim(&after[..end]);
    if head.is_empty() {
        return Err("MissingHead");
    }
    let Some(t) = tail_at else { return Err("MissingTail") };
    let mut tail = trim(&after[t + 12..]);
    while tail.last() == Some(&';') {
        tail.pop();
    }
    let tail = trim(&tail);
    if tail.is_empty() {
        return Err("MissingTail");
    }
    Ok((string(&head), string(&tail)))
}

pub fn entity_pair(input: &str) -> Out {
    for line in split_lines(&chars(input)) {
        if find_ci(&line, "head entity:").is_some() {
            return pair_line(&line).map(|(h, t)| json!([h, t]));
        }
    }
    Err("MissingHead")
}

pub fn entity_pairs(input: &str) -> Out {
    let mut pairs = Vec::new();
    let mut rejected = 0;
    for line in split_lines(&chars(input)) {
        if find_ci(&line, "head entity:").is_none() {
            continue;
        }
        match pair_line(&line) {
            Ok((h, t)) => pairs.push(json!([h, t])),
            Err(_) => rejected += 1,
        }
    }
    Ok(json!({"pairs": pairs, "rejected": rejected}))
}

fn senti(c: &[char]) -> Result<&'static str, &'static str> {
    let s = string(&trim_wp(c)).to_lowercase();
    match s.as_str() {
        "positive" | "pos" => Ok("positive"),
        "negative" | "neg" => Ok("negative"),
        "neutral" | "neu" => Ok("neutral"),
        _ => Err("BadSentiment"),
    }
}

fn filled(c: &[char]) -> Result<String, &'static str> {
    if c.is_empty() || none_marker(c) {
        Err("Grammar")
    } else {
        Ok(string(c))
    }
}

/// Parses `Key<digits>: value`, digits possibly empty.
fn keyed(part: &[char], key: &str) -> Option<(String, Chars)> {
    let mut i = 0;
    while i < part.len() && part[i].is_whitespace() {
        i += 1;
    }
    let rest = starts_ci(&part[i..], key)?;
    let colon = rest.iter().position(|x| *x == ':')?;
    let idx = &rest[..colon];
    if idx.iter().all(|x| x.is_ascii_digit()) {
        Some((string(idx), trim(&rest[colon + 1..])))
    } else {
        None
    }
}

fn items(c: &[char]) -> Vec<Chars> {
    split_on(c, &[';']).iter().map(|p| trim(p)).filter(|p| !p.is_empty()).collect()
}

fn inline(c: &[char]) -> Result<Vec<Value>, &'static str> {
    let parts = items(c);
    if parts.is_empty() {
        return Err("Empty");
    }
    if parts.len() == 1 {
        if let Some((_, v)) = keyed(&parts[0], "target") {
            if none_marker(&trim_wp(&v)) {
                return Ok(vec![]);
            }
        }
    }
    if !parts.len().is_multiple_of(3) {
        return Err("Grammar");
    }
    let mut out = Vec::new();
    let mut k = 0;
    while k < parts.len() {
        let t = keyed(&parts[k], "target");
        let o = keyed(&parts[k + 1], "opinion");
        let s = keyed(&parts[k + 2], "sentiment");
        let (Some((i, t)), Some((j, o)), Some((l, s))) = (t, o, s) else { return Err("Grammar") };
        if i != j || j != l {
            return Err("Grammar");
        }
        let t = filled(&t)?;
        let o = filled(&o)?;
        out.push(json!([t, o, senti(&s)?]));
        k += 3;
    }
    Ok(out)
}

fn parallel(t: Vec<Chars>, o: Vec<Chars>, s: Vec<Chars>) -> Result<Vec<Value>, &'static str> {
    if t.len() == 1 && none_marker(&t[0]) {
        return Ok(vec![]);
    }
    if t.len() != o.len() || o.len() != s.len() {
        return Err("LengthMismatch");
    }
    if t.is_empty() {
        return Err("Grammar");
    }
    let mut out = Vec::new();
    for k in 0..t.len() {
        let a = filled(&t[k])?;
        let b = filled(&o[k])?;
        out.push(json!([a, b, senti(&s[k])?]));
    }
    Ok(out)
}

fn content_lines(c: &[char]) -> Vec<Chars> {
    split_lines(c).iter().map(|l| trim(l)).filter(|l| !l.is_empty()).collect()
}

fn v1(c: &[char]) -> Result<Vec<Value>, &'static str> {
    let mut out: Vec<Value> = Vec::new();
    for line in content_lines(c) {
        if keyed(&line, "target").is_none() {
            break;
        }
        let got = inline(&line)?;
        if got.is_empty() && out.is_empty() {
            return Ok(got);
        }
        out.extend(got);
    }
    if out.is_empty() {
        Err("Grammar")
    } else {
        Ok(out)
    }
}

fn v2(c: &[char]) -> Result<Vec<Value>, &'static str> {
    let lines = content_lines(c);
    if lines.is_empty() {
        return Err("Grammar");
    }
    let Some(t) = starts_ci(&lines[0], "target:") else { return Err("Grammar") };
    let t = items(&t);
    if t.len() == 1 && none_marker(&t[0]) {
        return Ok(vec![]);
    }
    if lines.len() < 3 {
        return Err("Grammar");
    }
    let (Some(o), Some(s)) = (starts_ci(&lines[1], "opinion:"), starts_ci(&lines[2], "sentiment:")) else {
        return Err("Grammar");
    };
    parallel(t, items(&o), items(&s))
}

fn v3(c: &[char]) -> Result<Vec<Value>, &'static str> {
    let mut out: Vec<Value> = Vec::new();
    for line in content_lines(c) {
        let Some((_, body)) = keyed(&line, "target") else { break };
        if out.is_empty() && none_marker(&trim_wp(&body)) {
            return Ok(vec![]);
        }
        let Some(body) = starts_ci(&body, "is ") else { return Err("Grammar") };
        let (Some(o), Some(s)) =
            (find_exact(&body, ". Its opinion span is "), find_exact(&body, ". Its sentiment is "))
        else {
            return Err("Grammar");
        };
        if s < o {
            return Err("Grammar");
        }
        let target = trim(&body[..o]);
        let opinion = trim(&body[o + 22..s]);
        let mut sent = trim(&body[s + 19..]);
        while sent.last() == Some(&'.') {
            sent.pop();
        }
        let a = filled(&target)?;
        let b = filled(&opinion)?;
        out.push(json!([a, b, senti(&sent)?]));
    }
    if out.is_empty() {
        Err("Grammar")
    } else {
        Ok(out)
    }
}

pub fn aste(input: &str, variant: &str) -> Out {
    let c = chars(input);
    if is_blank(&c) {
        return Err("Empty");
    }
    let r = match variant {
        "1" => v1(&c),
        "2" => v2(&c),
        "3" => v3(&c),
        _ => Err("Grammar"),
    };
    r.map(Value::Array)
}

pub fn aste_inline(input: &str) -> Out {
    inline(&chars(input)).map(Value::Array)
}

pub fn aste_inline_parallel(input: &str) -> Out {
    let t = trim(&chars(input));
    if t.is_empty() {
        return Err("Empty");
    }
    let Some(rest) = starts_ci(&t, "target:") else { return Err("Grammar") };
    let Some(o) = find_ci(&rest, "opinion:") else {
        let it = items(&rest);
        return if it.len() == 1 && none_marker(&it[0]) { Ok(json!([])) } else { Err("Grammar") };
    };
    let after = &rest[o + 8..];
    let Some(s) = find_ci(after, "sentiment:") else { return Err("Grammar") };
    parallel(items(&rest[..o]), items(&after[..s]), items(&after[s + 10..])).map(Value::Array)
}

pub fn sentiment_line(input: &str) -> Out {
    let parts = items(&chars(input));
    if parts.is_empty() {
        return Err("Empty");
    }
    if parts.len() != 3 {
        return Err("Grammar");
    }
    let (Some(s), Some(t), Some(o)) =
        (starts_ci(&parts[0], "sentiment:"), starts_ci(&parts[1], "target:"), starts_ci(&parts[2], "opinion:"))
    else {
        return Err("Grammar");
    };
    let a = filled(&trim(&t))?;
    let b = filled(&trim(&o))?;
    Ok(json!([a, b, senti(&trim(&s))?]))
}

pub fn text_items(input: &str) -> Out {
    let mut out = Vec::new();
    for line in split_lines(&chars(input)) {
        let t = trim(&line);
        let item = starts_ci(&t, "text:").or_else(|| index_rest(&t));
        if let Some(item) = item {
            let x = trim(&trim_by(&trim(&item), |c| c == '"'));
            add_unique(&mut out, &x);
        }
    }
    Ok(json!(out))
}

pub fn sentence(input: &str) -> Out {
    let Some(line) = first_line(&chars(input)) else { return Err("Empty") };
    let mut t = trim(&line);
    if let Some(rest) = starts_ci(&t, "text:") {
        t = trim(&rest);
    }
    let t = trim(&trim_by(&t, |c| c == '"'));
    if t.is_empty() {
        Err("Empty")
    } else {
        Ok(json!(string(&t)))
    }
}

pub fn generated_entities(input: &str) -> Out {
    let numbered = numbered_items(input, false);
    let mut out = Vec::new();
    if !numbered.is_empty() {
        for n in numbered {
            let mut c = chars(&n);
            while matches!(c.last(), Some(',') | Some(';')) {
                c.pop();
            }
            add_unique(&mut out, &trim(&c));
        }
        return Ok(json!(out));
    }
    if let Some(line) = first_line(&chars(input)) {
        for part in split_on(&line, &[',', ';']) {
            add_unique(&mut out, &trim(&part));
        }
    }
    Ok(json!(out))
}

pub fn dispatch(parser: &str, variant: Option<&str>, input: &str, space: &[&str]) -> Out {
    match parser {
        "label" => label(input, space),
        "entity_list" => entity_list(input),
        "numbered_list" => numbered_list(input, variant.unwrap_or("strict")),
        "entity_pair" => entity_pair(input),
        "entity_pairs" => entity_pairs(input),
        "aste" => aste(input, variant.unwrap_or("1")),
        "aste_inline" => aste_inline(input),
        "aste_inline_parallel" => aste_inline_parallel(input),
        "sentiment_line" => sentiment_line(input),
        "text_items" => text_items(input),
        "sentence" => sentence(input),
        "generated_entities" => generated_entities(input),
        _ => Err("UnknownParser"),
    }
}
