//! A synthetic world answered by a closure provider. Replies depend only on
//! the prompt, the request id and per-relation span call counts, so runs are
//! reproducible under any worker count.
#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use annotis::backend::{Backend, FnProvider, ProviderReply};
use annotis::model::{LabelSpace, TaskKind, TaskSpec};
use annotis::prompt::Query;
use annotis::runner::Runner;

pub const NER_TYPES: [&str; 3] = ["person", "city", "band"];
pub const RELATIONS: [&str; 3] = ["head of government", "country", "director"];

/// Surface prefix the type passes recognise; `Ambi` tokens fit every type.
pub fn marker(entity_type: &str) -> String {
    let mut m: String = entity_type.chars().take(4).collect();
    m[..1].make_ascii_uppercase();
    m
}

pub fn ner_spec() -> TaskSpec {
    TaskSpec::new(TaskKind::Ner, LabelSpace::new(NER_TYPES).unwrap())
}

pub fn relation_spec() -> TaskSpec {
    TaskSpec::new(TaskKind::RelationExtraction, LabelSpace::new(RELATIONS).unwrap())
}

fn lines(prompt: &str) -> Vec<&str> {
    prompt.trim_end().lines().collect()
}

fn requested_count(prompt: &str) -> usize {
    let Some(at) = prompt.find("Generate ") else { return 0 };
    prompt[at + 9..].chars().take_while(char::is_ascii_digit).collect::<String>().parse().unwrap_or(0)
}

/// Sentence-stage behaviour for NER and relation seeds.
#[derive(Clone, Copy)]
pub enum SentencePolicy {
    Faithful,
    /// Leaves out the last entity when `request_id % 10 == residue`.
    OmitOneInTen {
        residue: u64,
    },
}

pub struct World {
    /// Pairs per span reply; `None` answers with the requested count.
    pub pairs_per_call: Option<usize>,
    /// Distinct pairs available per relation; `None` is unlimited.
    pub pair_pool: Option<usize>,
    pub sentences: SentencePolicy,
    pub omissions: Arc<AtomicUsize>,
    pub sentence_calls: Arc<AtomicUsize>,
    /// Span calls so far per relation. A relation's span prompts are issued
    /// one per round, so this count is the same under any worker count.
    pub span_calls: Mutex<HashMap<usize, usize>>,
}

impl Default for World {
    fn default() -> Self {
        World {
            pairs_per_call: None,
            pair_pool: None,
            sentences: SentencePolicy::Faithful,
            omissions: Arc::new(AtomicUsize::new(0)),
            sentence_calls: Arc::new(AtomicUsize::new(0)),
            span_calls: Mutex::new(HashMap::new()),
        }
    }
}

fn entity_sentence(entities: &[&str]) -> String {
    match entities {
        [] => "Nothing happened .".into(),
        [one] => format!("{one} was mentioned once ."),
        [init @ .., last] => format!("{} met {last} yesterday .", init.join(" , ")),
    }
}

impl World {
    pub fn reply(&self, prompt: &str, id: u64) -> String {
        let ls = lines(prompt);
        let last = *ls.last().unwrap_or(&"");
        let prev = if ls.len() >= 2 { ls[ls.len() - 2] } else { "" };

        if prompt.starts_with("Give a short definition of the entity type ") {
            return " A named thing of that kind.".into();
        }
        if last == "Entity Type:" {
            let entity = ls.iter().rev().find_map(|l| l.strip_prefix("Entity: ")).unwrap_or("");
            let candidates: Vec<&str> =
                ls.iter().rev().find_map(|l| l.strip_prefix("Candidate List: ")).unwrap_or("").split(", ").collect();
            let pick = entity.bytes().map(usize::from).sum::<usize>() % candidates.len().max(1);
            return format!(" {}", candidates.get(pick).unwrap_or(&""));
        }
        if let Some(ty) = last.strip_suffix(" entity:") {
            let ty = ty.to_lowercase();
            let text = prev.strip_prefix("Text: ").unwrap_or("");
            let m = marker(&ty);
            let found: Vec<&str> =
                text.split(' ').filter(|w| w.starts_with(m.as_str()) || w.starts_with("Ambi")).collect();
            return if found.is_empty() { " None".into() } else { format!(" {};", found.join("; ")) };
        }
        if last == "Sentiment:" {
            let text = prev.strip_prefix("Text: ").unwrap_or("");
            return if text.contains("good") { " Positive".into() } else { " Negative".into() };
        }
        if last == "Relation:" {
            let head = ls.iter().rev().find_map(|l| l.strip_prefix("Head Entity: ")).unwrap_or("");
            let i = head.chars().nth(1).and_then(|c| c.to_digit(10)).unwrap_or(0) as usize;
            return format!(" {}", RELATIONS.get(i).unwrap_or(&RELATIONS[0]));
        }
        if let Some(rel) = last.strip_prefix("Relation: ") {
            let i = RELATIONS.iter().position(|r| *r == rel).unwrap_or(0);
            let n = self.pairs_per_call.unwrap_or_else(|| requested_count(prompt));
            let call = {
                let mut m = self.span_calls.lock().unwrap();
                let c = m.entry(i).or_default();
                *c += 1;
                *c - 1
            };
            let rows: Vec<String> = (0..n)
                .map(|j| {
                    let k = call * n + j;
                    let k = self.pair_pool.map_or(k, |p| k % p);
                    format!("Head Entity: H{i}n{k}; Tail Entity: T{i}n{k}")
                })
                .collect();
            return format!("\n{}", rows.join("\n"));
        }
        if last.ends_with(':') && requested_count(prompt) > 0 && !last.contains(' ') {
            let ty = last.trim_end_matches(':').to_lowercase();
            let n = requested_count(prompt);
            let names: Vec<String> = (0..n).map(|j| format!("{}{id}x{j}", marker(&ty))).collect();
            return format!(" {}", names.join(", "));
        }
        if last == "Text:" {
            if let Some(list) = prev.strip_prefix("Entities: ") {
                self.sentence_calls.fetch_add(1, Ordering::SeqCst);
                let mut surfaces: Vec<&str> = list
                    .split(';')
                    .filter_map(|p| p.split_once(": ").map(|(_, s)| s.trim()))
                    .filter(|s| !s.is_empty())
                    .collect();
                if let SentencePolicy::OmitOneInTen { residue } = self.sentences {
                    if id % 10 == residue && !surfaces.is_empty() {
                        surfaces.pop();
                        self.omissions.fetch_add(1, Ordering::SeqCst);
                    }
                }
                return format!(" {}", entity_sentence(&surfaces));
            }
            if let Some(pair) = prev.strip_prefix("Head Entity: ") {
                self.sentence_calls.fetch_add(1, Ordering::SeqCst);
                let (h, t) = pair.split_once("; Tail Entity: ").unwrap_or((pair, ""));
                return format!(" {t} works closely with {h} .");
            }
        }
        String::new()
    }

    pub fn runner(self: &Arc<Self>, parallelism: usize) -> Runner {
        let w = self.clone();
        let p =
            FnProvider::new("world", move |req, meta| Ok(ProviderReply::text(w.reply(&req.prompt, meta.request_id))));
        Runner::new(Backend::new(Arc::new(p))).with_parallelism(parallelism)
    }
}

/// Sentences with typed, ambiguous and untyped tokens.
pub fn ner_queries(n: usize) -> Vec<Query> {
    (0..n)
        .map(|i| {
            Query::text(format!(
                "Pers{i} moved to City{} with Band{} and Ambi{} , said the report .",
                i % 7,
                i % 5,
                i % 3
            ))
        })
        .collect()
}

pub fn relation_queries(n: usize) -> Vec<Query> {
    (0..n)
        .map(|i| {
            let r = i % RELATIONS.len();
            Query::relation(format!("T{r}q{i} works closely with H{r}q{i} ."), format!("H{r}q{i}"), format!("T{r}q{i}"))
        })
        .collect()
}
