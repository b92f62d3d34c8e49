//! Fuzz target bodies. Each takes raw bytes, must never panic, and asserts
//! the decoder's round-trip property whenever the input decodes.
//! `crates/cli/tests/fuzz_corpus.rs` replays the checked-in corpus through
//! the same functions.

use annotis::dataset::{self, aste, bio, DatasetFormat};
use annotis::model::{LabelSpace, Provenance};
use annotis::parse::{self, ListMode};
use annotis::presets;

pub type Target = (&'static str, fn(&[u8]));

pub const TARGETS: [Target; 9] = [
    ("completion_parsers", completion_parsers),
    ("conll_bio", conll_bio),
    ("aste_line", aste_line),
    ("jsonl_dataset", jsonl_dataset),
    ("sparql_response", sparql_response),
    ("completion_response", completion_response),
    ("mock_script", mock_script),
    ("prompt_template", prompt_template),
    ("run_config", run_config),
];

fn text(data: &[u8]) -> Option<&str> {
    std::str::from_utf8(data).ok()
}

/// First byte picks the parser; the rest is the completion.
pub fn completion_parsers(data: &[u8]) {
    let Some((&sel, rest)) = data.split_first() else { return };
    let Some(s) = text(rest) else { return };
    match sel % 14 {
        0 => {
            let space = presets::sst2().label_space;
            if let Ok(l) = parse::parse_label(s, &space) {
                assert!(space.contains(l));
            }
        }
        1 => {
            let space: LabelSpace = presets::fewrel().label_space;
            if let Ok(l) = parse::parse_label(s, &space) {
                assert!(space.contains(l));
            }
        }
        2 => {
            for e in parse::parse_entity_list(s) {
                assert!(!e.is_empty());
            }
        }
        3 => drop(parse::parse_numbered_list(s, ListMode::Strict)),
        4 => drop(parse::parse_numbered_list(s, ListMode::Lenient)),
        5 => drop(parse::parse_entity_pair(s)),
        6 => {
            let (pairs, rejected) = parse::parse_entity_pairs(s);
            assert!(pairs.len() + rejected <= s.lines().count());
        }
        7 => {
            for v in 1..=3 {
                drop(parse::parse_aste(s, v));
            }
        }
        8 => drop(parse::parse_aste_inline(s)),
        9 => drop(parse::parse_aste_inline_parallel(s)),
        10 => drop(parse::parse_sentiment_line(s)),
        11 => drop(parse::parse_text_items(s)),
        12 => {
            if let Ok(t) = parse::parse_sentence(s) {
                assert!(!t.is_empty() && !t.contains('\n'));
            }
        }
        _ => {
            drop(parse::parse_definition(s));
            drop(parse::parse_generated_entities(s));
        }
    }
}

/// Decodes as a dataset file and checks that re-emitting settles after one
/// round. Token-level formats may respace the first ingest.
fn dataset_fixpoint(format: DatasetFormat, s: &str) {
    let Ok(insts) = dataset::ingest(format, s, Provenance::Gold) else { return };
    let out = dataset::emit(format, &insts).expect("ingested data re-emits");
    let again = dataset::ingest(format, &out, Provenance::Gold).expect("emitted data ingests");
    assert_eq!(insts.len(), again.len());
    assert_eq!(out, dataset::emit(format, &again).expect("re-ingested data re-emits"));
}

pub fn conll_bio(data: &[u8]) {
    let Some(s) = text(data) else { return };
    let read = bio::read_conll(s);
    if bio::validate_conll(s).is_ok() {
        assert!(read.is_ok());
    }
    if let Ok(sents) = read {
        for b in sents {
            drop(b.to_spans());
        }
    }
    dataset_fixpoint(DatasetFormat::ConllBio, s);
}

pub fn aste_line(data: &[u8]) {
    let Some(s) = text(data) else { return };
    for line in s.lines() {
        if let Err((at, _)) = aste::parse_line(line) {
            assert!(at <= line.len());
        }
    }
    dataset_fixpoint(DatasetFormat::AsteIndexed, s);
}

pub fn jsonl_dataset(data: &[u8]) {
    let Some(s) = text(data) else { return };
    dataset_fixpoint(DatasetFormat::JsonlClassification, s);
    dataset_fixpoint(DatasetFormat::JsonlRelation, s);
}

pub fn sparql_response(data: &[u8]) {
    let Some(s) = text(data) else { return };
    drop(annotis::dictionary::parse_pairs_response(s));
    drop(annotis::dictionary::parse_entities_response(s));
}

pub fn completion_response(data: &[u8]) {
    let Some(s) = text(data) else { return };
    drop(annotis::backend::parse_completion_response(s));
}

pub fn mock_script(data: &[u8]) {
    let Some(s) = text(data) else { return };
    if let Ok(script) = annotis::backend::MockScript::from_json(s) {
        drop(annotis::backend::MockProvider::new(script));
    }
}

pub fn prompt_template(data: &[u8]) {
    let Some(s) = text(data) else { return };
    drop(annotis::prompt::template::Format::parse(s));
    drop(annotis::prompt::PromptTemplate::from_json(s));
}

pub fn run_config(data: &[u8]) {
    let Some(s) = text(data) else { return };
    if let Ok(cfg) = annotis_cli::config::parse(s) {
        drop(annotis_cli::config::task_spec(&cfg.task));
    }
}
