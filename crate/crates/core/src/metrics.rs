//! Exact Match / F1 scoring with the usual SQuAD normalization, aggregate
//! evaluation, and adversarial-gap arithmetic.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, PredictionSet};
use crate::error::{Error, Result};
use crate::text::compensated_sum;

const ARTICLES: [&str; 3] = ["a", "an", "the"];

/// Lowercase, replace punctuation with spaces, drop articles, split on whitespace.
///
/// Any character that is neither alphanumeric nor whitespace counts as punctuation,
/// so "24-10" becomes `["24", "10"]`.
pub fn normalize_answer(text: &str) -> Vec<String> {
    let spaced: String = text
        .to_lowercase()
        .chars()
        .map(|c| {
            if c.is_alphanumeric() || c.is_whitespace() {
                c
            } else {
                ' '
            }
        })
        .collect();
    spaced
        .split_whitespace()
        .filter(|t| !ARTICLES.contains(t))
        .map(str::to_owned)
        .collect()
}

/// 1 if the normalized prediction equals any normalized gold answer.
///
/// An empty gold list means the question is unanswerable; the prediction then
/// matches only if it normalizes to nothing.
pub fn exact_match<S: AsRef<str>>(prediction: &str, gold_answers: &[S]) -> u8 {
    let pred = normalize_answer(prediction);
    if gold_answers.is_empty() {
        return u8::from(pred.is_empty());
    }
    u8::from(gold_answers.iter().any(|g| normalize_answer(g.as_ref()) == pred))
}

fn token_f1(pred: &[String], gold: &[String]) -> f64 {
    if pred.is_empty() || gold.is_empty() {
        return if pred.is_empty() && gold.is_empty() { 1.0 } else { 0.0 };
    }
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for g in gold {
        *counts.entry(g.as_str()).or_default() += 1;
    }
    let mut overlap = 0usize;
    for p in pred {
        if let Some(c) = counts.get_mut(p.as_str()) {
            if *c > 0 {
                *c -= 1;
                overlap += 1;
            }
        }
    }
    if overlap == 0 {
        return 0.0;
    }
    // 2PR/(P+R) with P = o/|p|, R = o/|g| simplifies to 2o/(|p|+|g|).
    (2 * overlap) as f64 / (pred.len() + gold.len()) as f64
}

/// Maximum token-multiset F1 over the gold answers.
pub fn f1_score<S: AsRef<str>>(prediction: &str, gold_answers: &[S]) -> f64 {
    let pred = normalize_answer(prediction);
    if gold_answers.is_empty() {
        return token_f1(&pred, &[]);
    }
    gold_answers
        .iter()
        .map(|g| token_f1(&pred, &normalize_answer(g.as_ref())))
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleScore {
    pub em: u8,
    pub f1: f64,
    pub predicted: String,
    pub gold: Vec<String>,
    pub missing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Percentage in [0, 100].
    pub em: f64,
    pub f1: f64,
    pub n_examples: usize,
    pub n_missing: usize,
    pub per_example: BTreeMap<String, ExampleScore>,
}

/// Score every example. Missing predictions score 0 and are logged.
pub fn evaluate(dataset: &Dataset, predictions: &PredictionSet) -> Result<EvalReport> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let scored: Vec<(String, ExampleScore)> = dataset
        .examples
        .par_iter()
        .map(|ex| {
            let gold: Vec<String> = ex.answers.iter().map(|a| a.text.clone()).collect();
            let (score, missing) = match predictions.get(&ex.id) {
                Some(p) => ((exact_match(p, &gold), f1_score(p, &gold)), false),
                None => ((0, 0.0), true),
            };
            let predicted = predictions.get(&ex.id).unwrap_or_default().to_string();
            (
                ex.id.clone(),
                ExampleScore {
                    em: score.0,
                    f1: score.1,
                    predicted,
                    gold,
                    missing,
                },
            )
        })
        .collect();
    let n = scored.len() as f64;
    let em_hits: u64 = scored.iter().map(|(_, s)| u64::from(s.em)).sum();
    let f1_sum = compensated_sum(scored.iter().map(|(_, s)| s.f1));
    let n_missing = scored.iter().filter(|(_, s)| s.missing).count();
    if n_missing > 0 {
        log::warn!("{n_missing} examples have no prediction; scored as 0");
    }
    Ok(EvalReport {
        em: 100.0 * em_hits as f64 / n,
        f1: 100.0 * f1_sum / n,
        n_examples: scored.len(),
        n_missing,
        per_example: scored.into_iter().collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub clean_em: f64,
    pub adversarial_em: f64,
    /// Signed percentage points, `adversarial_em - clean_em`.
    pub gap: f64,
    /// Share of a baseline gap that this gap closes, in percent.
    pub closure: Option<f64>,
}

impl GapReport {
    pub fn from_em(clean_em: f64, adversarial_em: f64) -> Self {
        GapReport {
            clean_em,
            adversarial_em,
            gap: adversarial_em - clean_em,
            closure: None,
        }
    }

    pub fn with_baseline(mut self, baseline_gap: f64) -> Self {
        self.closure = gap_closure(baseline_gap, self.gap);
        self
    }
}

pub fn adversarial_gap(clean: &EvalReport, adversarial: &EvalReport) -> Result<GapReport> {
    if clean.n_examples == 0 || adversarial.n_examples == 0 {
        return Err(Error::EmptyDataset);
    }
    Ok(GapReport::from_em(clean.em, adversarial.em))
}

/// Percentage of `baseline_gap` eliminated by `new_gap`. `None` for a zero baseline.
pub fn gap_closure(baseline_gap: f64, new_gap: f64) -> Option<f64> {
    (baseline_gap != 0.0).then(|| 100.0 * (baseline_gap - new_gap) / baseline_gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Answer, QAExample};

    #[test]
    fn normalization() {
        assert_eq!(normalize_answer("The Denver Broncos"), ["denver", "broncos"]);
        assert!(normalize_answer("").is_empty());
        assert_eq!(normalize_answer("24-10"), ["24", "10"]);
        assert_eq!(normalize_answer("  An apple, a day!"), ["apple", "day"]);
        assert_eq!(normalize_answer("Theatre"), ["theatre"]);
    }

    #[test]
    fn em_cases() {
        assert_eq!(exact_match("Panthers", &["Denver Broncos"]), 0);
        assert_eq!(exact_match("the Denver Broncos", &["Denver Broncos"]), 1);
        assert_eq!(exact_match("", &[] as &[&str]), 1);
        assert_eq!(exact_match("x", &[] as &[&str]), 0);
        assert_eq!(exact_match("Broncos", &["Panthers", "broncos."]), 1);
    }

    #[test]
    fn f1_cases() {
        assert!((f1_score("Broncos", &["Denver Broncos"]) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(f1_score("Denver Broncos", &["Denver Broncos"]), 1.0);
        assert_eq!(f1_score("Panthers", &["Denver Broncos"]), 0.0);
        assert_eq!(f1_score("", &[] as &[&str]), 1.0);
        assert_eq!(f1_score("the", &["Denver"]), 0.0);
        // multiset overlap counts repeated tokens once per occurrence
        assert!((f1_score("a b b", &["b c"]) - 0.5).abs() < 1e-15);
    }

    fn ex(id: &str, ctx: &str, ans: &str) -> QAExample {
        let start = ctx.find(ans).unwrap();
        QAExample::new(
            id,
            "q?",
            ctx,
            vec![Answer {
                text: ans.into(),
                answer_start: start,
            }],
        )
    }

    #[test]
    fn evaluate_half() {
        let ds = Dataset::new(
            vec![ex("a", "alpha beta", "alpha"), ex("b", "gamma delta", "delta")],
            "t",
        )
        .unwrap();
        let preds: PredictionSet = [("a", "alpha"), ("b", "zeta")].into_iter().collect();
        let r = evaluate(&ds, &preds).unwrap();
        assert_eq!(r.em, 50.0);
        assert_eq!(r.f1, 50.0);
        assert_eq!(r.per_example.len(), 2);
    }

    #[test]
    fn evaluate_missing_and_empty() {
        let ds = Dataset::new(vec![ex("a", "alpha beta", "alpha")], "t").unwrap();
        let r = evaluate(&ds, &PredictionSet::default()).unwrap();
        assert_eq!((r.em, r.n_missing), (0.0, 1));
        assert!(matches!(
            evaluate(&Dataset::default(), &PredictionSet::default()),
            Err(Error::EmptyDataset)
        ));
    }

    #[test]
    fn gap() {
        let g = GapReport::from_em(85.46, 68.90);
        assert!((g.gap + 16.56).abs() < 1e-12);
        let c = gap_closure(-16.56, -0.84).unwrap();
        assert!((c - 94.927).abs() < 1e-3);
        assert_eq!(gap_closure(0.0, 1.0), None);
    }
}
