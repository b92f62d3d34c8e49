// Parser fixture corpus and a JSON-valued dispatch over the library parsers.
#![allow(dead_code)]

use std::path::{Path, PathBuf};

use serde::Deserialize;
use serde_json::{json, Value};

use annotis::model::{LabelSpace, SurfaceTriplet};
use annotis::parse::{self, ListMode};
use annotis::presets;

#[derive(Debug, Deserialize)]
pub struct Fixture {
    pub name: String,
    pub parser: String,
    pub variant: Option<String>,
    pub input: String,
    pub expected: Expected,
}

#[derive(Debug, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
pub enum Expected {
    Ok(Value),
    Err(String),
}

pub fn fixture_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/parsers")
}

pub fn load(dir: &Path) -> Vec<Fixture> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            serde_json::from_str(&std::fs::read_to_string(p).unwrap())
                .unwrap_or_else(|e| panic!("{}: {e}", p.display()))
        })
        .collect()
}

pub fn space_for(variant: Option<&str>) -> LabelSpace {
    match variant {
        Some("fewrel") => presets::fewrel().label_space,
        Some("crossner") => presets::crossner_ai().label_space,
        Some("aste") => presets::aste_laptop().label_space,
        _ => presets::sst2().label_space,
    }
}

fn trip(t: &SurfaceTriplet) -> Value {
    json!([t.target, t.opinion, t.sentiment.as_str()])
}

fn trips(v: &[SurfaceTriplet]) -> Value {
    Value::Array(v.iter().map(trip).collect())
}

pub fn production(parser: &str, variant: Option<&str>, input: &str) -> Result<Value, String> {
    let r = |e: parse::ParseFailure| e.reason.as_str().to_string();
    match parser {
        "label" => parse::parse_label(input, &space_for(variant)).map(|l| json!(l)).map_err(r),
        "entity_list" => Ok(json!(parse::parse_entity_list(input))),
        "numbered_list" => {
            let mode = if variant == Some("lenient") { ListMode::Lenient } else { ListMode::Strict };
            Ok(json!(parse::parse_numbered_list(input, mode)))
        }
        "entity_pair" => parse::parse_entity_pair(input).map(|(h, t)| json!([h, t])).map_err(r),
        "entity_pairs" => {
            let (pairs, rejected) = parse::parse_entity_pairs(input);
            Ok(json!({"pairs": pairs.iter().map(|(h, t)| json!([h, t])).collect::<Vec<_>>(), "rejected": rejected}))
        }
        "aste" => {
            let v: u8 = variant.unwrap_or("1").parse().unwrap_or(0);
            parse::parse_aste(input, v).map(|t| trips(&t)).map_err(r)
        }
        "aste_inline" => parse::parse_aste_inline(input).map(|t| trips(&t)).map_err(r),
        "aste_inline_parallel" => parse::parse_aste_inline_parallel(input).map(|t| trips(&t)).map_err(r),
        "sentiment_line" => parse::parse_sentiment_line(input).map(|t| trip(&t)).map_err(r),
        "text_items" => Ok(json!(parse::parse_text_items(input))),
        "sentence" => parse::parse_sentence(input).map(|s| json!(s)).map_err(r),
        "generated_entities" => Ok(json!(parse::parse_generated_entities(input))),
        other => Err(format!("unknown parser {other}")),
    }
}

pub fn reference(parser: &str, variant: Option<&str>, input: &str) -> Result<Value, String> {
    let space = space_for(variant);
    let labels: Vec<&str> = space.iter().collect();
    super::reference::dispatch(parser, variant, input, &labels).map_err(str::to_string)
}

pub fn as_expected(r: &Result<Value, String>) -> Expected {
    match r {
        Ok(v) => Expected::Ok(v.clone()),
        Err(e) => Expected::Err(e.clone()),
    }
}

/// (fixture name, production, reference, expected) for every disagreement.
pub fn disagreements(fixtures: &[Fixture]) -> Vec<String> {
    let mut bad = Vec::new();
    for f in fixtures {
        let v = f.variant.as_deref();
        let p = as_expected(&production(&f.parser, v, &f.input));
        let q = as_expected(&reference(&f.parser, v, &f.input));
        if p != q || p != f.expected {
            bad.push(format!("{}: production {:?}, reference {:?}, expected {:?}", f.name, p, q, f.expected));
        }
    }
    bad
}
