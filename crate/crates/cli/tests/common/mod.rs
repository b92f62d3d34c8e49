//! Scratch workspaces with mock scripts, inputs and configs for CLI runs.
#![allow(dead_code)]

pub mod world;

use std::path::{Path, PathBuf};

use annotis::dictionary::{fixture_key, response_body, DictQuery, QueryKind};
use serde_json::{json, Value};
use tempfile::TempDir;

pub struct Workspace {
    pub dir: TempDir,
}

impl Workspace {
    pub fn new() -> Self {
        Workspace { dir: tempfile::tempdir().expect("tempdir") }
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    pub fn write(&self, rel: &str, contents: &str) -> PathBuf {
        let p = self.path(rel);
        if let Some(parent) = p.parent() {
            std::fs::create_dir_all(parent).unwrap();
        }
        std::fs::write(&p, contents).unwrap();
        p
    }

    pub fn write_json(&self, rel: &str, v: &Value) -> PathBuf {
        self.write(rel, &serde_json::to_string_pretty(v).unwrap())
    }
}

pub fn rules(pairs: &[(String, String)]) -> Value {
    let rules: Vec<Value> = pairs.iter().map(|(p, r)| json!({"pattern": p, "response": r})).collect();
    json!({ "rules": rules })
}

pub const SST2_ITEMS: [(&str, &str); 6] = [
    ("a warm and witty crowd pleaser", "Positive"),
    ("tedious and badly paced", "Negative"),
    ("the cast shines in every scene", "Positive"),
    ("a hollow and joyless affair", "Negative"),
    ("sharp writing and great fun", "Positive"),
    ("dull plot and flat acting", "Negative"),
];

/// Mock rules answering the SST2 annotation prompt for each item.
pub fn sst2_annotation_rules(items: &[(&str, &str)]) -> Vec<(String, String)> {
    items.iter().map(|(t, l)| (format!("Text: {t}\nSentiment:$"), format!(" {l}"))).collect()
}

/// Annotation run over the first `n` SST2 items.
pub fn sst2_annotate(ws: &Workspace, name: &str, n: usize, gold_input: bool) -> PathBuf {
    let items = &SST2_ITEMS[..n];
    ws.write_json(&format!("{name}/mock.json"), &rules(&sst2_annotation_rules(items)));
    let (input_name, fmt, rows): (&str, &str, Vec<String>) = if gold_input {
        ("gold.jsonl", "dataset", items.iter().map(|(t, l)| json!({"text": t, "label": l}).to_string()).collect())
    } else {
        ("queries.jsonl", "queries", items.iter().map(|(t, _)| json!({"text": t}).to_string()).collect())
    };
    ws.write(&format!("{name}/{input_name}"), &(rows.join("\n") + "\n"));
    ws.write_json(
        &format!("{name}/config.json"),
        &json!({
            "task": {"kind": "classification"},
            "backend": {"provider": "mock", "mock_script": "mock.json"},
            "pipeline": {},
            "io": {"input": input_name, "input_format": fmt, "output_dir": "run"}
        }),
    )
}

pub const RELATION: &str = "head of government";

pub fn pair(k: usize) -> (String, String) {
    (format!("Alpha{k}"), format!("Beta{k}"))
}

/// FewRel-style generation of one relation. Sentence responses for the
/// indices in `omit` leave out the tail entity.
pub fn fewrel_generate(ws: &Workspace, name: &str, cap: usize, omit: &[usize]) -> PathBuf {
    let pairs: Vec<String> = (0..20)
        .map(|k| {
            let (h, t) = pair(k);
            format!("Head Entity: {h}; Tail Entity: {t}")
        })
        .collect();
    let mut r = vec![(format!("Relation: {RELATION}$"), format!("\n{}", pairs.join("\n")))];
    for k in 0..20 {
        let (h, t) = pair(k);
        let s =
            if omit.contains(&k) { format!("{h} won the vote .") } else { format!("{t} was elected to lead {h} .") };
        r.push((format!("Head Entity: {h}; Tail Entity: {t}\nText:$"), format!(" {s}")));
    }
    ws.write_json(&format!("{name}/mock.json"), &rules(&r));
    ws.write_json(
        &format!("{name}/config.json"),
        &json!({
            "task": {"kind": "relation_extraction", "labels": [RELATION]},
            "backend": {"provider": "mock", "mock_script": "mock.json"},
            "pipeline": {"budget": {"per_label_cap": cap, "sentence_retries": 0}},
            "io": {"output_dir": "run"}
        }),
    )
}

pub const ENTITIES: [&str; 3] = ["Tom Hanks", "Meryl Streep", "Denzel Washington"];

/// Dictionary-seeded SST2 generation over fixture entities.
pub fn sst2_dadg(ws: &Workspace, name: &str) -> PathBuf {
    let q = DictQuery::new("Q33999", 3);
    let rows: Vec<Vec<&str>> = ENTITIES.iter().map(|e| vec![*e]).collect();
    ws.write(
        &format!("{name}/fixtures/{}.json", fixture_key(QueryKind::Entities, &q)),
        &response_body(QueryKind::Entities, &rows),
    );
    let mut r = Vec::new();
    for e in ENTITIES {
        for (s, word) in [("Positive", "wonderful"), ("Negative", "dreadful")] {
            r.push((format!("Entity: {e}\nSentiment: {s}\nText:$"), format!(" {e} is {word} in this film .")));
        }
    }
    ws.write_json(&format!("{name}/mock.json"), &rules(&r));
    ws.write_json(
        &format!("{name}/config.json"),
        &json!({
            "task": {"kind": "classification"},
            "backend": {"provider": "mock", "mock_script": "mock.json"},
            "pipeline": {"mode": "dadg", "budget": {"per_label_cap": 3}},
            "dictionary": {"fixture_dir": "fixtures", "shared": q},
            "io": {"output_dir": "run"}
        }),
    )
}

/// The model-only SST2 review generator.
pub fn sst2_pgdg(ws: &Workspace, name: &str) -> PathBuf {
    let r = vec![
        (
            "positive sentiments".to_string(),
            " a joyous ride\nText: moving and funny\nText: a sheer delight".to_string(),
        ),
        ("negative sentiments".to_string(), " a tired retread\nText: painfully slow".to_string()),
    ];
    ws.write_json(&format!("{name}/mock.json"), &rules(&r));
    ws.write_json(
        &format!("{name}/config.json"),
        &json!({
            "task": {"kind": "classification"},
            "backend": {"provider": "mock", "mock_script": "mock.json"},
            "pipeline": {"budget": {"per_label_cap": 3}},
            "io": {"output_dir": "run", "split": [0.5, 0.5]}
        }),
    )
}

pub fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

pub fn read_json(p: &Path) -> Value {
    serde_json::from_str(&read(p)).unwrap()
}

/// Every file in a run directory except the timing sidecar, by name.
pub fn snapshot(dir: &Path) -> Vec<(String, String)> {
    let mut v: Vec<(String, String)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "timestamps.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), read(&p)))
        .collect();
    v.sort();
    v
}
