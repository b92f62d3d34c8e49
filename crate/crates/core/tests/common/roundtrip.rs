// Format-then-parse round trip over randomized valid annotations.
// Each annotation becomes a shot; every template of its kind renders the
// example block, the answer after the query block is parsed with the
// template's grammar, and the result must equal what the annotation says.
#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use annotis::model::{
    Annotation, AsteTriplet, EntitySpan, FewShotExample, Mention, RelationInstance, Sentiment, SurfaceTriplet, TaskKind,
};
use annotis::parse::{parse_answer, Parsed};
use annotis::presets;
use annotis::prompt::template::{Value, Vars};
use annotis::prompt::{Catalog, PromptEngine, RenderedPrompt};

const WORDS: &[&str] = &[
    "battery",
    "screen",
    "keyboard",
    "price",
    "speed",
    "fan",
    "case",
    "port",
    "display",
    "driver",
    "good",
    "slow",
    "loud",
    "cheap",
    "bright",
    "heavy",
    "great",
    "poor",
    "fast",
    "movie",
    "plot",
    "actor",
    "score",
    "scene",
    "Paris",
    "Łódź",
    "café",
    "Titiwangsa",
    "Korbu",
    "Fei-Fei",
    "Minsky",
    "MIT",
    "deep",
    "learning",
    "model",
    "river",
    "city",
    "team",
    "season",
    "album",
    "Ångström",
    "naïve",
    "x86",
    "GPT-3",
    "it's",
];

#[derive(Debug, Default, Clone)]
pub struct KindReport {
    pub annotations: usize,
    pub checks: usize,
    pub failures: Vec<String>,
    pub templates: std::collections::BTreeSet<String>,
}

fn words(rng: &mut ChaCha8Rng, lo: usize, hi: usize) -> Vec<String> {
    let n = rng.gen_range(lo..=hi);
    (0..n).map(|_| WORDS.choose(rng).unwrap().to_string()).collect()
}

fn range(rng: &mut ChaCha8Rng, len: usize, max: usize) -> (usize, usize) {
    let w = rng.gen_range(1..=max.min(len));
    let s = rng.gen_range(0..=len - w);
    (s, s + w)
}

pub fn random_annotation(kind: TaskKind, rng: &mut ChaCha8Rng) -> Annotation {
    match kind {
        TaskKind::Classification => Annotation::Classification {
            text: words(rng, 1, 12).join(" "),
            label: presets::SST2_LABELS.choose(rng).unwrap().to_string(),
        },
        TaskKind::RelationExtraction => {
            let toks = words(rng, 4, 14);
            let (hs, he) = range(rng, toks.len(), 3);
            let (ts, te) = loop {
                let r = range(rng, toks.len(), 3);
                if r.1 <= hs || r.0 >= he {
                    break r;
                }
            };
            Annotation::Relation(RelationInstance {
                sentence: toks.join(" "),
                head: Mention::new(toks[hs..he].join(" ")),
                tail: Mention::new(toks[ts..te].join(" ")),
                relation: presets::FEWREL_RELATIONS.choose(rng).unwrap().to_string(),
            })
        }
        TaskKind::Ner => {
            let toks = words(rng, 3, 16);
            let sentence = toks.join(" ");
            let starts: Vec<usize> = {
                let mut at = 0;
                toks.iter()
                    .map(|t| {
                        let s = at;
                        at += t.len() + 1;
                        s
                    })
                    .collect()
            };
            let mut spans = Vec::new();
            let mut i = 0;
            while i < toks.len() {
                if rng.gen_bool(0.35) {
                    let w = rng.gen_range(1..=3).min(toks.len() - i);
                    let s = starts[i];
                    let e = starts[i + w - 1] + toks[i + w - 1].len();
                    let ty = presets::CROSSNER_AI_TYPES.choose(rng).unwrap();
                    spans.push(EntitySpan::new(&sentence, s, e, *ty).unwrap());
                    i += w + 1;
                } else {
                    i += 1;
                }
            }
            Annotation::Ner { sentence, spans }
        }
        TaskKind::Aste => {
            let toks = words(rng, 4, 15);
            let sentence = toks.join(" ");
            let n = rng.gen_range(1..=3);
            let triplets = (0..n)
                .map(|_| {
                    let (a, b) = range(rng, toks.len(), 3);
                    let (c, d) = range(rng, toks.len(), 3);
                    let s = *Sentiment::ALL.choose(rng).unwrap();
                    AsteTriplet::from_indices(&sentence, (a..b).collect(), (c..d).collect(), s).unwrap()
                })
                .collect();
            Annotation::Aste { sentence, triplets }
        }
    }
}

fn fake_prompt(query_block: &str) -> RenderedPrompt {
    RenderedPrompt {
        text: String::new(),
        template_id: String::new(),
        shot_count: 0,
        stop: vec![],
        max_tokens: 1,
        answer_prefix: query_block.rsplit('\n').next().unwrap_or_default().to_string(),
        query_block: query_block.to_string(),
    }
}

fn dedup(v: impl IntoIterator<Item = String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for x in v {
        if !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// What the grammar should recover from a block built for `ann` with `focus`.
fn expected(ann: &Annotation, template: &str, focus: Option<&str>, block: &Vars) -> Option<Parsed> {
    let text = |v: &Vars, k: &str| match v.get(k) {
        Some(Value::Text(s)) => s.clone(),
        _ => String::new(),
    };
    Some(match (ann, template) {
        (Annotation::Classification { label, .. }, "pgda-sst2") => Parsed::Label { label: label.clone() },
        (Annotation::Classification { text, .. }, "pgdg-sst2") => Parsed::Texts { texts: vec![text.clone()] },
        (_, "dadg-sst2" | "fewrel-sentence" | "crossner-sentence" | "aste-sentence") => {
            Parsed::Sentence { text: ann.text().to_string() }
        }
        (Annotation::Relation(r), id) if id.starts_with("pgda-fewrel") => Parsed::Label { label: r.relation.clone() },
        (Annotation::Relation(r), "pgdg-fewrel-span") => {
            Parsed::Pairs { pairs: vec![(r.head.surface.clone(), r.tail.surface.clone())], rejected: 0 }
        }
        (Annotation::Ner { spans, .. }, "crossner-type-pass") => Parsed::Entities {
            entities: dedup(spans.iter().filter(|s| Some(s.entity_type.as_str()) == focus).map(|s| s.surface.clone())),
        },
        (Annotation::Ner { spans, .. }, "pgdg-crossner-entity") => Parsed::Entities {
            entities: dedup(spans.iter().filter(|s| Some(s.entity_type.as_str()) == focus).map(|s| s.surface.clone())),
        },
        (Annotation::Aste { triplets, .. }, id) if id.starts_with("pgda-aste") => {
            Parsed::Triplets { triplets: triplets.iter().map(SurfaceTriplet::from).collect() }
        }
        (Annotation::Aste { triplets, .. }, "pgdg-aste-1" | "pgdg-aste-2") => {
            Parsed::TripletSets { sets: vec![triplets.iter().map(SurfaceTriplet::from).collect()], rejected: 0 }
        }
        (Annotation::Aste { .. }, "pgdg-aste-3") => Parsed::Triplets {
            triplets: vec![SurfaceTriplet::new(
                text(block, "target"),
                text(block, "opinion"),
                text(block, "sentiment").parse().ok()?,
            )],
        },
        _ => return None,
    })
}

fn focus_for(ann: &Annotation, template: &str, rng: &mut ChaCha8Rng) -> Option<String> {
    match ann {
        Annotation::Classification { label, .. } => Some(label.clone()),
        Annotation::Relation(r) => Some(r.relation.clone()),
        Annotation::Ner { spans, .. } => {
            if template == "pgdg-crossner-entity" || rng.gen_bool(0.7) {
                spans.choose(rng).map(|s| s.entity_type.clone()).or_else(|| Some("misc".into()))
            } else {
                Some(presets::CROSSNER_AI_TYPES.choose(rng).unwrap().to_string())
            }
        }
        Annotation::Aste { triplets, .. } => Some(triplets[0].sentiment.as_str().to_string()),
    }
}

pub fn run_kind(kind: TaskKind, n: usize, seed: u64) -> KindReport {
    let engine = PromptEngine::new(Catalog::builtin());
    let catalog = engine.catalog();
    let ids: Vec<String> =
        catalog.ids().filter(|id| catalog.get(id).unwrap().kind() == kind).map(str::to_string).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = KindReport::default();
    for i in 0..n {
        let ann = random_annotation(kind, &mut rng);
        let base = presets::for_kind(kind);
        let spec = match base.clone().with_shots(vec![FewShotExample::new(ann.clone())]) {
            Ok(s) => s,
            Err(e) => {
                rep.failures.push(format!("#{i}: generator produced an invalid annotation: {e}"));
                continue;
            }
        };
        rep.annotations += 1;
        for id in &ids {
            // answer-side templates only; dadg prompts are built from seeds
            if id.starts_with("dadg-") {
                continue;
            }
            let t = catalog.get(id).unwrap();
            let focus = focus_for(&ann, id, &mut rng);
            let mut globals = Vars::new();
            if let Some(f) = &focus {
                globals.insert("entity_type".into(), Value::Text(f.clone()));
            }
            for block in engine.shot_vars(t, &spec, focus.as_deref()) {
                let split = match t.example_answer(&block, &globals) {
                    Ok(Some(s)) => s,
                    Ok(None) => continue,
                    Err(e) => {
                        rep.failures.push(format!("#{i} {id}: render: {e}"));
                        continue;
                    }
                };
                let Some(want) = expected(&ann, id, focus.as_deref(), &block) else { continue };
                let (query, answer) = split;
                let got = parse_answer(t.file.answer, &fake_prompt(&query), &answer, &spec.label_space);
                rep.checks += 1;
                rep.templates.insert(id.clone());
                if got.as_ref() != Ok(&want) {
                    rep.failures.push(format!("#{i} {id}: answer {answer:?} parsed to {got:?}, want {want:?}"));
                }
            }
        }
    }
    rep
}
