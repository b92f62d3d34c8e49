//! Light stand-ins for a downstream model: a token-count classifier for
//! classification and relation labels, a gazetteer tagger for NER and a
//! lexicon matcher for ASTE, plus exact-match scorers and the comparison
//! table.
//!
//! Metrics are percentages rounded to two decimals.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::backend::round2;
use crate::model::{AnnotatedInstance, Annotation, AsteTriplet, EntitySpan, RelationInstance, TaskKind};
use crate::tokenize::tokenize;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("{pred} predictions for {gold} gold instances")]
    LengthMismatch { pred: usize, gold: usize },
    #[error("instance {index} is {found}, expected {expected}")]
    KindMismatch { index: usize, expected: TaskKind, found: TaskKind },
}

/// Case-folded unigram tokens.
pub fn text_features(text: &str) -> Vec<String> {
    tokenize(text).iter().map(|t| t.text.to_lowercase()).collect()
}

/// Sentence tokens plus `head:`/`tail:` marked mention tokens.
pub fn relation_features(r: &RelationInstance) -> Vec<String> {
    let mut f = text_features(&r.sentence);
    f.extend(text_features(&r.head.surface).into_iter().map(|t| format!("head:{t}")));
    f.extend(text_features(&r.tail.surface).into_iter().map(|t| format!("tail:{t}")));
    f
}

/// Multinomial model with add-one smoothing. Tokens outside the training
/// vocabulary are ignored at prediction time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenCountModel {
    /// Classes seen in training, in the caller's label order.
    pub classes: Vec<String>,
    pub log_priors: Vec<f64>,
    pub vocabulary: BTreeSet<String>,
    counts: Vec<BTreeMap<String, u64>>,
    totals: Vec<u64>,
}

impl TokenCountModel {
    /// `label_order` fixes class order and so tie-breaking; labels absent
    /// from it sort after, alphabetically.
    pub fn train<'a, I>(docs: I, label_order: &[String]) -> Result<Self, EvalError>
    where
        I: IntoIterator<Item = (&'a [String], &'a str)>,
    {
        let mut per: BTreeMap<String, (u64, BTreeMap<String, u64>, u64)> = BTreeMap::new();
        let mut vocabulary = BTreeSet::new();
        let mut n = 0u64;
        for (toks, label) in docs {
            n += 1;
            let e = per.entry(label.to_string()).or_default();
            e.0 += 1;
            for t in toks {
                *e.1.entry(t.clone()).or_default() += 1;
                e.2 += 1;
                vocabulary.insert(t.clone());
            }
        }
        if n == 0 {
            return Err(EvalError::EmptyTrainingSet);
        }
        let rank = |l: &str| label_order.iter().position(|x| x == l).unwrap_or(usize::MAX);
        let mut classes: Vec<String> = per.keys().cloned().collect();
        classes.sort_by(|a, b| rank(a).cmp(&rank(b)).then(a.cmp(b)));
        let mut log_priors = Vec::new();
        let mut counts = Vec::new();
        let mut totals = Vec::new();
        for c in &classes {
            let (docs, cnt, tot) = per.remove(c).expect("class from keys");
            log_priors.push((docs as f64 / n as f64).ln());
            counts.push(cnt);
            totals.push(tot);
        }
        Ok(TokenCountModel { classes, log_priors, vocabulary, counts, totals })
    }

    fn log_likelihood(&self, class: usize, token: &str) -> f64 {
        let c = self.counts[class].get(token).copied().unwrap_or(0);
        ((c + 1) as f64 / (self.totals[class] + self.vocabulary.len() as u64) as f64).ln()
    }

    /// Sum over the vocabulary of the smoothed token probabilities.
    pub fn likelihood_mass(&self, class: usize) -> f64 {
        self.vocabulary.iter().map(|t| self.log_likelihood(class, t).exp()).sum()
    }

    pub fn scores(&self, tokens: &[String]) -> Vec<f64> {
        (0..self.classes.len())
            .map(|c| {
                self.log_priors[c]
                    + tokens
                        .iter()
                        .filter(|t| self.vocabulary.contains(*t))
                        .map(|t| self.log_likelihood(c, t))
                        .sum::<f64>()
            })
            .collect()
    }

    /// Highest-scoring class; the earlier class wins a tie.
    pub fn predict(&self, tokens: &[String]) -> &str {
        let s = self.scores(tokens);
        let mut best = 0;
        for (i, v) in s.iter().enumerate().skip(1) {
            if *v > s[best] {
                best = i;
            }
        }
        &self.classes[best]
    }
}

/// Longest-match dictionary of training entity surfaces.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gazetteer {
    /// Folded token sequence → type counts.
    entries: BTreeMap<Vec<String>, BTreeMap<String, usize>>,
    longest: usize,
}

impl Gazetteer {
    pub fn train<'a>(instances: impl IntoIterator<Item = (&'a str, &'a [EntitySpan])>) -> Self {
        let mut g = Gazetteer::default();
        for (_, spans) in instances {
            for s in spans {
                let key = text_features(&s.surface);
                if key.is_empty() {
                    continue;
                }
                g.longest = g.longest.max(key.len());
                *g.entries.entry(key).or_default().entry(s.entity_type.clone()).or_default() += 1;
            }
        }
        g
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Left to right, longest entry first; a surface's most frequent type,
    /// ties alphabetical.
    pub fn tag(&self, sentence: &str) -> Vec<EntitySpan> {
        let toks = tokenize(sentence);
        let folded: Vec<String> = toks.iter().map(|t| t.text.to_lowercase()).collect();
        let mut out = Vec::new();
        let mut i = 0;
        while i < toks.len() {
            let mut hit = None;
            for len in (1..=self.longest.min(toks.len() - i)).rev() {
                if let Some(types) = self.entries.get(&folded[i..i + len]) {
                    let best = types.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(t, _)| t.clone());
                    hit = best.map(|t| (len, t));
                    break;
                }
            }
            match hit {
                Some((len, ty)) => {
                    let (s, e) = (toks[i].start, toks[i + len - 1].end);
                    out.push(EntitySpan { surface: sentence[s..e].to_string(), start: s, end: e, entity_type: ty });
                    i += len;
                }
                None => i += 1,
            }
        }
        out
    }
}

/// Training triplets keyed by folded (target, opinion) surfaces.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletLexicon {
    entries: BTreeMap<(String, String), BTreeMap<String, usize>>,
}

impl TripletLexicon {
    pub fn train<'a>(instances: impl IntoIterator<Item = &'a [AsteTriplet]>) -> Self {
        let mut l = TripletLexicon::default();
        for ts in instances {
            for t in ts {
                let key = (t.target_surface.to_lowercase(), t.opinion_surface.to_lowercase());
                *l.entries.entry(key).or_default().entry(t.sentiment.code().to_string()).or_default() += 1;
            }
        }
        l
    }

    /// Every known (target, opinion) pair whose surfaces both occur.
    pub fn predict(&self, sentence: &str) -> Vec<AsteTriplet> {
        let toks = tokenize(sentence);
        let mut out = Vec::new();
        for ((t, o), s) in &self.entries {
            let (Some(ti), Some(oi)) = (crate::align::align_tokens(&toks, t), crate::align::align_tokens(&toks, o))
            else {
                continue;
            };
            let code =
                s.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(c, _)| c.as_str()).unwrap_or("NEU");
            let sentiment = match code {
                "POS" => crate::model::Sentiment::Positive,
                "NEG" => crate::model::Sentiment::Negative,
                _ => crate::model::Sentiment::Neutral,
            };
            if let Some(a) = AsteTriplet::from_indices(sentence, ti.collect(), oi.collect(), sentiment) {
                if !out.contains(&a) {
                    out.push(a);
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: TaskKind,
    /// Instances scored.
    pub support: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// Classification: gold → predicted → count.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub confusion: BTreeMap<String, BTreeMap<String, usize>>,
}

fn pct(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

/// Micro P/R/F1 from counts. With nothing predicted and nothing gold, all
/// three are 100.
pub fn prf(tp: usize, fp: usize, fn_: usize) -> (f64, f64, f64) {
    if tp + fp + fn_ == 0 {
        return (100.0, 100.0, 100.0);
    }
    let p = pct(tp, tp + fp);
    let r = pct(tp, tp + fn_);
    let f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
    (round2(p), round2(r), round2(f))
}

fn check_len(pred: usize, gold: usize) -> Result<(), EvalError> {
    if pred != gold {
        return Err(EvalError::LengthMismatch { pred, gold });
    }
    Ok(())
}

pub fn score_classification<S: AsRef<str>>(task: TaskKind, pred: &[S], gold: &[S]) -> Result<EvalReport, EvalError> {
    check_len(pred.len(), gold.len())?;
    let mut confusion: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    let mut correct = 0;
    for (p, g) in pred.iter().zip(gold) {
        let (p, g) = (p.as_ref(), g.as_ref());
        if p == g {
            correct += 1;
        }
        *confusion.entry(g.to_string()).or_default().entry(p.to_string()).or_default() += 1;
    }
    let wrong = gold.len() - correct;
    let (precision, recall, f1) = prf(correct, wrong, wrong);
    Ok(EvalReport {
        task,
        support: gold.len(),
        accuracy: Some(round2(pct(correct, gold.len()))),
        precision,
        recall,
        f1,
        true_positives: correct,
        false_positives: wrong,
        false_negatives: wrong,
        confusion,
    })
}

fn score_sets<K: Ord + Clone>(task: TaskKind, pred: &[Vec<K>], gold: &[Vec<K>]) -> Result<EvalReport, EvalError> {
    check_len(pred.len(), gold.len())?;
    let (mut tp, mut fp, mut fn_) = (0, 0, 0);
    for (p, g) in pred.iter().zip(gold) {
        let mut gc: BTreeMap<&K, usize> = BTreeMap::new();
        for k in g {
            *gc.entry(k).or_default() += 1;
        }
        let mut hit = 0;
        for k in p {
            if let Some(c) = gc.get_mut(k) {
                if *c > 0 {
                    *c -= 1;
                    hit += 1;
                }
            }
        }
        tp += hit;
        fp += p.len() - hit;
        fn_ += g.len() - hit;
    }
    let (precision, recall, f1) = prf(tp, fp, fn_);
    Ok(EvalReport {
        task,
        support: gold.len(),
        accuracy: None,
        precision,
        recall,
        f1,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
        confusion: BTreeMap::new(),
    })
}

/// A span is correct iff start, end and type match a gold span.
pub fn score_spans(pred: &[Vec<EntitySpan>], gold: &[Vec<EntitySpan>]) -> Result<EvalReport, EvalError> {
    let key = |v: &Vec<EntitySpan>| v.iter().map(|s| (s.start, s.end, s.entity_type.clone())).collect::<Vec<_>>();
    score_sets(TaskKind::Ner, &pred.iter().map(key).collect::<Vec<_>>(), &gold.iter().map(key).collect::<Vec<_>>())
}

/// A triplet is correct iff target indices, opinion indices and sentiment match.
pub fn score_triplets(pred: &[Vec<AsteTriplet>], gold: &[Vec<AsteTriplet>]) -> Result<EvalReport, EvalError> {
    let key =
        |v: &Vec<AsteTriplet>| v.iter().map(|t| (t.target.clone(), t.opinion.clone(), t.sentiment)).collect::<Vec<_>>();
    score_sets(TaskKind::Aste, &pred.iter().map(key).collect::<Vec<_>>(), &gold.iter().map(key).collect::<Vec<_>>())
}

fn expect_all(kind: TaskKind, xs: &[AnnotatedInstance]) -> Result<(), EvalError> {
    match xs.iter().position(|x| x.kind() != kind) {
        Some(index) => Err(EvalError::KindMismatch { index, expected: kind, found: xs[index].kind() }),
        None => Ok(()),
    }
}

/// Trains the proxy for `kind` on `train` and scores it on `test`.
pub fn evaluate(
    kind: TaskKind,
    train: &[AnnotatedInstance],
    test: &[AnnotatedInstance],
    label_order: &[String],
) -> Result<EvalReport, EvalError> {
    expect_all(kind, train)?;
    expect_all(kind, test)?;
    if train.is_empty() {
        return Err(EvalError::EmptyTrainingSet);
    }
    match kind {
        TaskKind::Classification | TaskKind::RelationExtraction => {
            let doc = |a: &Annotation| match a {
                Annotation::Classification { text, label } => (text_features(text), label.clone()),
                Annotation::Relation(r) => (relation_features(r), r.relation.clone()),
                _ => unreachable!("kind checked"),
            };
            let tr: Vec<(Vec<String>, String)> = train.iter().map(|i| doc(&i.annotation)).collect();
            let model = TokenCountModel::train(tr.iter().map(|(t, l)| (t.as_slice(), l.as_str())), label_order)?;
            let te: Vec<(Vec<String>, String)> = test.iter().map(|i| doc(&i.annotation)).collect();
            let pred: Vec<String> = te.iter().map(|(t, _)| model.predict(t).to_string()).collect();
            let gold: Vec<String> = te.into_iter().map(|(_, l)| l).collect();
            score_classification(kind, &pred, &gold)
        }
        TaskKind::Ner => {
            let parts = |i: &AnnotatedInstance| match &i.annotation {
                Annotation::Ner { sentence, spans } => (sentence.clone(), spans.clone()),
                _ => unreachable!("kind checked"),
            };
            let tr: Vec<_> = train.iter().map(parts).collect();
            let g = Gazetteer::train(tr.iter().map(|(s, sp)| (s.as_str(), sp.as_slice())));
            let te: Vec<_> = test.iter().map(parts).collect();
            let pred: Vec<Vec<EntitySpan>> = te.iter().map(|(s, _)| g.tag(s)).collect();
            let gold: Vec<Vec<EntitySpan>> = te.into_iter().map(|(_, sp)| sp).collect();
            score_spans(&pred, &gold)
        }
        TaskKind::Aste => {
            let parts = |i: &AnnotatedInstance| match &i.annotation {
                Annotation::Aste { sentence, triplets } => (sentence.clone(), triplets.clone()),
                _ => unreachable!("kind checked"),
            };
            let tr: Vec<_> = train.iter().map(parts).collect();
            let lex = TripletLexicon::train(tr.iter().map(|(_, t)| t.as_slice()));
            let te: Vec<_> = test.iter().map(parts).collect();
            let pred: Vec<Vec<AsteTriplet>> = te.iter().map(|(s, _)| lex.predict(s)).collect();
            let gold: Vec<Vec<AsteTriplet>> = te.into_iter().map(|(_, t)| t).collect();
            score_triplets(&pred, &gold)
        }
    }
}

/// Metric columns per task: a single result for classification and NER,
/// P/R/F1 for relations and triplets.
pub fn metric_columns(kind: TaskKind) -> &'static [&'static str] {
    match kind {
        TaskKind::Classification | TaskKind::Ner => &["Results"],
        TaskKind::RelationExtraction | TaskKind::Aste => &["P", "R", "F1"],
    }
}

pub fn metric_values(r: &EvalReport) -> Vec<f64> {
    match r.task {
        TaskKind::Classification => vec![r.accuracy.unwrap_or(r.f1)],
        TaskKind::Ner => vec![r.f1],
        TaskKind::RelationExtraction | TaskKind::Aste => vec![r.precision, r.recall, r.f1],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub approach: String,
    pub num_samples: usize,
    pub cost_usd: f64,
    pub time_mins: f64,
    /// Absent when the run was not evaluated.
    pub metrics: Option<Vec<f64>>,
}

pub const BASE_COLUMNS: [&str; 4] = ["Approach", "Num. of Samples", "Cost (USD)", "Time (Mins)"];

/// Aligned text table: first column left-aligned, the rest right-aligned,
/// two spaces between columns, a dashed rule under the header.
pub fn render_table(metric_names: &[&str], rows: &[ReportRow]) -> String {
    let header: Vec<String> = BASE_COLUMNS.iter().chain(metric_names).map(|s| s.to_string()).collect();
    let mut cells: Vec<Vec<String>> = vec![header];
    for r in rows {
        let mut c = vec![
            r.approach.clone(),
            r.num_samples.to_string(),
            format!("{:.2}", r.cost_usd),
            format!("{:.2}", r.time_mins),
        ];
        for k in 0..metric_names.len() {
            c.push(r.metrics.as_ref().and_then(|m| m.get(k)).map_or("-".to_string(), |v| format!("{v:.2}")));
        }
        cells.push(c);
    }
    let widths: Vec<usize> =
        (0..cells[0].len()).map(|j| cells.iter().map(|r| r[j].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (i, row) in cells.iter().enumerate() {
        let mut line = String::new();
        for (j, cell) in row.iter().enumerate() {
            if j > 0 {
                line.push_str("  ");
            }
            let pad = widths[j] - cell.chars().count();
            if j == 0 {
                line.push_str(cell);
                line.extend(std::iter::repeat_n(' ', pad));
            } else {
                line.extend(std::iter::repeat_n(' ', pad));
                line.push_str(cell);
            }
        }
        let _ = writeln!(out, "{}", line.trim_end());
        if i == 0 {
            let total = widths.iter().sum::<usize>() + 2 * (widths.len() - 1);
            let _ = writeln!(out, "{}", "-".repeat(total));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Provenance, Sentiment};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn labels(ls: &[&str]) -> Vec<String> {
        ls.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn separable_and_single_class() {
        let docs = [(text_features("good"), "Pos"), (text_features("bad"), "Neg")];
        let m = TokenCountModel::train(docs.iter().map(|(t, l)| (t.as_slice(), *l)), &labels(&["Pos", "Neg"])).unwrap();
        assert_eq!(m.predict(&text_features("good")), "Pos");
        assert_eq!(m.predict(&text_features("bad")), "Neg");
        // tie goes to label order
        assert_eq!(m.predict(&text_features("unknown")), "Pos");
        for c in 0..2 {
            assert!((m.likelihood_mass(c) - 1.0).abs() < 1e-9);
        }
        let one = [(text_features("a b"), "X")];
        let m1 = TokenCountModel::train(one.iter().map(|(t, l)| (t.as_slice(), *l)), &[]).unwrap();
        assert_eq!(m1.predict(&text_features("zzz")), "X");
        let none: [(Vec<String>, &str); 0] = [];
        assert_eq!(
            TokenCountModel::train(none.iter().map(|(t, l)| (t.as_slice(), *l)), &[]),
            Err(EvalError::EmptyTrainingSet)
        );
    }

    #[test]
    fn disjoint_vocabularies_are_perfect() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let vocab = |p: &str| (0..50).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
        let (va, vb) = (vocab("a"), vocab("b"));
        let mut make = |n: usize| -> Vec<AnnotatedInstance> {
            (0..n)
                .map(|i| {
                    let (v, l) = if i % 2 == 0 { (&va, "Positive") } else { (&vb, "Negative") };
                    let text: Vec<&str> = (0..8).map(|_| v[rng.gen_range(0..50)].as_str()).collect();
                    AnnotatedInstance::new(
                        Annotation::Classification { text: text.join(" "), label: l.into() },
                        Provenance::Gold,
                    )
                })
                .collect()
        };
        let (train, test) = (make(200), make(100));
        let r = evaluate(TaskKind::Classification, &train, &test, &labels(&["Positive", "Negative"])).unwrap();
        assert_eq!(r.accuracy, Some(100.0));
        assert_eq!(r.f1, 100.0);
    }

    fn span(s: usize, e: usize, t: &str) -> EntitySpan {
        EntitySpan { surface: String::new(), start: s, end: e, entity_type: t.into() }
    }

    #[test]
    fn span_scoring() {
        let gold = vec![vec![span(0, 3, "a"), span(4, 6, "b")]];
        assert_eq!(score_spans(&gold, &gold).unwrap().f1, 100.0);
        let r = score_spans(&[vec![]], &gold).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
        let pred = vec![vec![span(0, 3, "a"), span(7, 9, "b")]];
        let r = score_spans(&pred, &gold).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (50.0, 50.0, 50.0));
        assert_eq!((r.true_positives, r.false_positives, r.false_negatives), (1, 1, 1));
        let wrong_type = vec![vec![span(0, 3, "b"), span(4, 6, "b")]];
        assert_eq!(score_spans(&wrong_type, &gold).unwrap().true_positives, 1);
        assert_eq!(score_spans(&[], &gold), Err(EvalError::LengthMismatch { pred: 0, gold: 1 }));
    }

    #[test]
    fn triplet_scoring_and_lexicon() {
        let s = "The battery life is long but the keyboard is cramped .";
        let t1 = AsteTriplet::from_indices(s, vec![1, 2], vec![4], Sentiment::Positive).unwrap();
        let t2 = AsteTriplet::from_indices(s, vec![7], vec![9], Sentiment::Negative).unwrap();
        let gold = vec![vec![t1.clone(), t2.clone()]];
        let lex = TripletLexicon::train([gold[0].as_slice()]);
        let mut pred = lex.predict(s);
        pred.sort();
        let mut g = gold[0].clone();
        g.sort();
        assert_eq!(pred, g);
        let flipped = AsteTriplet { sentiment: Sentiment::Neutral, ..t2 };
        let r = score_triplets(&[vec![t1, flipped]], &gold).unwrap();
        assert_eq!(r.f1, 50.0);
    }

    #[test]
    fn classification_micro_equals_accuracy() {
        let r = score_classification(TaskKind::Classification, &["a", "b", "a", "a"], &["a", "b", "b", "a"]).unwrap();
        assert_eq!(r.accuracy, Some(75.0));
        assert_eq!(r.f1, 75.0);
        assert_eq!(r.confusion["b"]["a"], 1);
    }

    #[test]
    fn gazetteer_longest_match() {
        let s = "Marvin Minsky joined MIT Press .";
        let spans =
            vec![EntitySpan::new(s, 0, 13, "researcher").unwrap(), EntitySpan::new(s, 21, 30, "organisation").unwrap()];
        let g = Gazetteer::train([(s, &spans[..1]), (s, &spans[1..])]);
        let extra = Gazetteer::train([("MIT", &[EntitySpan::new("MIT", 0, 3, "university").unwrap()][..])]);
        assert_eq!(g.tag(s), spans);
        assert_eq!(extra.tag("at mit today").len(), 1);
    }

    #[test]
    fn table_layout() {
        let rows = vec![
            ReportRow {
                approach: "PGDA".into(),
                num_samples: 3000,
                cost_usd: 11.2,
                time_mins: 22.5,
                metrics: Some(vec![87.75]),
            },
            ReportRow { approach: "PGDG".into(), num_samples: 6000, cost_usd: 0.08, time_mins: 3.0, metrics: None },
        ];
        let t = render_table(metric_columns(TaskKind::Classification), &rows);
        let expect = "\
Approach  Num. of Samples  Cost (USD)  Time (Mins)  Results
-----------------------------------------------------------
PGDA                 3000       11.20        22.50    87.75
PGDG                 6000        0.08         3.00        -
";
        assert_eq!(t, expect);
    }
}
