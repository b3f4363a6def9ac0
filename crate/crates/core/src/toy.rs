//! A linear span scorer trained with [`total_loss`], used to compare the
//! contrastive objective against plain QA loss at desk scale.
//!
//! Each context token gets a fixed feature vector (see [`FEATURE_NAMES`]); position 0 is
//! a null slot that scores unanswerable questions. Start and end logits are dot products
//! of the features with two learned weight vectors.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attacks::{run_augmentation, AttackConfig};
use crate::corpus::{Dataset, QAExample};
use crate::entity::{extract_entities, map_to_token_positions, mine_hard_negatives, tokenize_with_offsets, EntityType};
use crate::error::{Error, Result};
use crate::losskit::{span_score, total_loss, LossConfig, Span, SpanExample};
use crate::metrics::{exact_match, f1_score};
use crate::mixer::{mix, MixConfig, MixRatio, Sampling};
use crate::synthetic::{synthetic_corpus, SyntheticSpec};
use crate::taxonomy::{classify_question_type, QuestionType};
use crate::text::{compensated_sum, derive_seed, lower_words, sentence_index, sentence_spans, CharIndex};

pub const FEATURE_NAMES: [&str; 12] = [
    "bias",
    "null_slot",
    "word_in_question",
    "sentence_overlap",
    "type_match",
    "entity_start",
    "entity_end",
    "in_distractor",
    "question_proximity",
    "capitalized",
    "numeric",
    "sentence_negated",
];
pub const N_FEATURES: usize = FEATURE_NAMES.len();

/// Longest predicted span, in tokens.
const MAX_SPAN: usize = 12;

const QUESTION_STOPWORDS: &[&str] = &[
    "the", "a", "an", "of", "in", "to", "was", "is", "are", "were", "did", "does", "do", "what", "when", "who",
    "where", "which", "why", "how", "many", "much", "by", "for", "its", "it", "and", "on", "at", "with",
];

/// Feature rows for one example, ready for training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Featurized {
    pub id: String,
    /// `rows[0]` is the null slot; `rows[i]` describes context token `i - 1`.
    pub rows: Vec<[f64; N_FEATURES]>,
    /// Character range of each context token.
    pub offsets: Vec<(usize, usize)>,
    pub gold: Span,
    pub negatives: Vec<Span>,
    pub weight: f64,
    pub context: String,
    pub gold_texts: Vec<String>,
}

fn expected_types(question: &str) -> &'static [EntityType] {
    use EntityType::*;
    match classify_question_type(question) {
        QuestionType::When => &[Year, Date, Time],
        QuestionType::Who => &[Person, Organization],
        QuestionType::Where => &[Location, Facility],
        QuestionType::Number => &[Number, Money, Percent],
        QuestionType::What => &[Organization, Misc, Event, Facility, Location],
        _ => &[],
    }
}

/// Build feature rows and token-level targets. Hard negatives are mined here.
pub fn featurize(example: &QAExample) -> Featurized {
    let mut ex = example.clone();
    let negs = mine_hard_negatives(&mut ex).map(|s| s.negatives).unwrap_or_default();
    let tok = tokenize_with_offsets(&ex.context);
    let idx = CharIndex::new(&ex.context);
    let sents = sentence_spans(&ex.context);
    let q_words: BTreeSet<String> = lower_words(&ex.question)
        .into_iter()
        .filter(|w| !QUESTION_STOPWORDS.contains(&w.as_str()))
        .collect();
    let lower_tokens: Vec<String> = tok.tokens.iter().map(|t| t.to_lowercase()).collect();
    let sent_of: Vec<usize> = tok.offsets.iter().map(|&(s, _)| sentence_index(&sents, s)).collect();

    let overlap: Vec<f64> = sents
        .iter()
        .map(|&(s, e)| {
            if q_words.is_empty() {
                return 0.0;
            }
            let words: BTreeSet<String> = lower_words(idx.slice(s, e).unwrap_or_default()).into_iter().collect();
            q_words.iter().filter(|w| words.contains(*w)).count() as f64 / q_words.len() as f64
        })
        .collect();
    let negated: Vec<bool> = sents
        .iter()
        .map(|&(s, e)| crate::text::contains_negation(idx.slice(s, e).unwrap_or_default()))
        .collect();

    let n = tok.len();
    let mut rows = vec![[0.0; N_FEATURES]; n + 1];
    rows[0][1] = 1.0;
    let wanted = expected_types(&ex.question);
    for e in extract_entities(&ex.context) {
        if let Ok((a, b)) = map_to_token_positions((e.char_start, e.char_end), &tok) {
            rows[a + 1][5] = 1.0;
            rows[b + 1][6] = 1.0;
            if wanted.contains(&e.entity_type) {
                for r in &mut rows[a + 1..=b + 1] {
                    r[4] = 1.0;
                }
            }
        }
    }
    let q_positions: Vec<usize> = (0..n).filter(|&i| q_words.contains(&lower_tokens[i])).collect();
    for i in 0..n {
        let r = &mut rows[i + 1];
        let (cs, _) = tok.offsets[i];
        r[0] = 1.0;
        r[2] = f64::from(u8::from(q_words.contains(&lower_tokens[i])));
        r[3] = overlap.get(sent_of[i]).copied().unwrap_or(0.0);
        r[7] = f64::from(u8::from(ex.distractor_spans.iter().any(|&(s, e)| s <= cs && cs < e)));
        r[8] = q_positions
            .iter()
            .filter(|&&j| sent_of[j] == sent_of[i] && j != i)
            .map(|&j| 1.0 / (1.0 + i.abs_diff(j) as f64))
            .fold(0.0, f64::max);
        r[9] = f64::from(u8::from(tok.tokens[i].chars().next().is_some_and(char::is_uppercase)));
        r[10] = f64::from(u8::from(tok.tokens[i].chars().all(|c| c.is_ascii_digit())));
        r[11] = f64::from(u8::from(negated.get(sent_of[i]).copied().unwrap_or(false)));
    }

    let gold = ex
        .answers
        .first()
        .filter(|_| !ex.is_impossible)
        .and_then(|a| {
            let end = a.answer_start + crate::text::char_len(&a.text);
            map_to_token_positions((a.answer_start, end), &tok).ok()
        })
        .map_or((0, 0), |(a, b)| (a + 1, b + 1));
    let mut negatives: Vec<Span> = Vec::new();
    for ng in negs {
        if let (Some(a), Some(b)) = (ng.token_start, ng.token_end) {
            let s = (a + 1, b + 1);
            if s != gold && !negatives.contains(&s) {
                negatives.push(s);
            }
        }
    }
    Featurized {
        id: ex.id.clone(),
        rows,
        offsets: tok.offsets,
        gold,
        negatives,
        weight: ex.loss_weight,
        gold_texts: ex.answers.iter().map(|a| a.text.clone()).collect(),
        context: ex.context,
    }
}

/// Start and end weight vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanScorer {
    pub start: [f64; N_FEATURES],
    pub end: [f64; N_FEATURES],
}

impl Default for SpanScorer {
    fn default() -> Self {
        SpanScorer {
            start: [0.0; N_FEATURES],
            end: [0.0; N_FEATURES],
        }
    }
}

fn dot(w: &[f64; N_FEATURES], x: &[f64; N_FEATURES]) -> f64 {
    w.iter().zip(x).map(|(a, b)| a * b).sum()
}

impl SpanScorer {
    pub fn logits(&self, f: &Featurized) -> (Vec<f64>, Vec<f64>) {
        (
            f.rows.iter().map(|r| dot(&self.start, r)).collect(),
            f.rows.iter().map(|r| dot(&self.end, r)).collect(),
        )
    }

    fn span_example(&self, f: &Featurized) -> SpanExample {
        let (s, e) = self.logits(f);
        SpanExample {
            start_logits: s,
            end_logits: e,
            gold: f.gold,
            weight: f.weight,
            negatives: f.negatives.clone(),
        }
    }

    /// Highest-scoring span with `start <= end < start + MAX_SPAN`, or the null slot.
    pub fn predict(&self, f: &Featurized) -> String {
        let (s, e) = self.logits(f);
        let mut best = (s[0] + e[0], 0, 0);
        for (i, si) in s.iter().enumerate().skip(1) {
            for (j, ej) in e.iter().enumerate().take(i + MAX_SPAN).skip(i) {
                let v = si + ej;
                if v > best.0 {
                    best = (v, i, j);
                }
            }
        }
        if best.1 == 0 {
            return String::new();
        }
        let (cs, _) = f.offsets[best.1 - 1];
        let (_, ce) = f.offsets[best.2 - 1];
        CharIndex::new(&f.context).slice(cs, ce).unwrap_or_default().to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHyper {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    pub seed: u64,
}

impl Default for TrainHyper {
    fn default() -> Self {
        TrainHyper {
            epochs: 3,
            lr: 0.01,
            batch_size: 16,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub alpha: f64,
    pub hyper: TrainHyper,
    /// Mean training loss before training (index 0) and after each epoch.
    pub loss_curve: Vec<f64>,
    pub eval_em: f64,
    pub eval_f1: f64,
    /// Share of eval examples with negatives whose gold span outscores every negative, in percent.
    pub ranking_accuracy: f64,
    pub ranked_examples: usize,
    pub scorer: SpanScorer,
}

fn dataset_loss(scorer: &SpanScorer, data: &[Featurized], cfg: &LossConfig) -> Result<f64> {
    let batch: Vec<SpanExample> = data.iter().map(|f| scorer.span_example(f)).collect();
    Ok(total_loss(&batch, cfg)?.value)
}

/// Score the gold span against the negatives; `None` when there are none.
pub fn gold_outranks(scorer: &SpanScorer, f: &Featurized) -> Option<bool> {
    if f.negatives.is_empty() {
        return None;
    }
    let (s, e) = scorer.logits(f);
    let g = span_score(&s, &e, f.gold).ok()?;
    Some(f.negatives.iter().all(|&n| span_score(&s, &e, n).is_ok_and(|v| g > v)))
}

/// Mini-batch gradient descent on [`total_loss`], starting from zero weights.
pub fn toy_train(train: &Dataset, eval: &Dataset, config: &LossConfig, hyper: &TrainHyper) -> Result<TrainReport> {
    config.validate()?;
    if train.is_empty() || eval.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if hyper.batch_size == 0 {
        return Err(Error::InvalidConfig("batch_size must be positive".into()));
    }
    let train_f: Vec<Featurized> = train.examples.iter().map(featurize).collect();
    let eval_f: Vec<Featurized> = eval.examples.iter().map(featurize).collect();
    let mut scorer = SpanScorer::default();
    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let mut order: Vec<usize> = (0..train_f.len()).collect();
    let mut curve = vec![dataset_loss(&scorer, &train_f, config)?];

    for epoch in 1..=hyper.epochs {
        order.shuffle(&mut rng);
        for chunk in order.chunks(hyper.batch_size) {
            let batch: Vec<SpanExample> = chunk.iter().map(|&i| scorer.span_example(&train_f[i])).collect();
            let loss = total_loss(&batch, config)?;
            if !loss.value.is_finite() {
                return Err(Error::DivergenceDetected { epoch });
            }
            let mut gs = [0.0; N_FEATURES];
            let mut ge = [0.0; N_FEATURES];
            for (&i, g) in chunk.iter().zip(&loss.grads) {
                for (t, row) in train_f[i].rows.iter().enumerate() {
                    for k in 0..N_FEATURES {
                        gs[k] += g.start[t] * row[k];
                        ge[k] += g.end[t] * row[k];
                    }
                }
            }
            for k in 0..N_FEATURES {
                scorer.start[k] -= hyper.lr * gs[k];
                scorer.end[k] -= hyper.lr * ge[k];
            }
        }
        let l = dataset_loss(&scorer, &train_f, config)?;
        if !l.is_finite() {
            return Err(Error::DivergenceDetected { epoch });
        }
        curve.push(l);
    }

    let mut em = Vec::with_capacity(eval_f.len());
    let mut f1 = Vec::with_capacity(eval_f.len());
    let mut ranked = 0usize;
    let mut wins = 0usize;
    for f in &eval_f {
        let p = scorer.predict(f);
        em.push(f64::from(exact_match(&p, &f.gold_texts)));
        f1.push(f1_score(&p, &f.gold_texts));
        if let Some(w) = gold_outranks(&scorer, f) {
            ranked += 1;
            wins += usize::from(w);
        }
    }
    let n = eval_f.len() as f64;
    Ok(TrainReport {
        alpha: config.alpha,
        hyper: hyper.clone(),
        loss_curve: curve,
        eval_em: 100.0 * compensated_sum(em) / n,
        eval_f1: 100.0 * compensated_sum(f1) / n,
        ranking_accuracy: if ranked == 0 {
            0.0
        } else {
            100.0 * wins as f64 / ranked as f64
        },
        ranked_examples: ranked,
        scorer,
    })
}

/// Training and evaluation sets built with the toolkit's own pipeline.
///
/// Training data: a synthetic clean corpus mixed 80-20 with decoy-appended and
/// attack-augmented examples. Evaluation data: a separate decoy-appended corpus.
pub fn toy_datasets(seed: u64, n_train: usize, n_eval: usize) -> Result<(Dataset, Dataset)> {
    let clean = synthetic_corpus(&SyntheticSpec::new(n_train, derive_seed(seed, "train-clean"), "tc"))?;
    let mut adv_spec = SyntheticSpec::new(n_train / 2, derive_seed(seed, "train-adv"), "ta");
    adv_spec.addsent = true;
    let addsent = synthetic_corpus(&adv_spec)?;
    let attack_cfg = AttackConfig {
        seed: derive_seed(seed, "attacks"),
        ..AttackConfig::default()
    };
    let (augmented, _) = run_augmentation(&addsent, &attack_cfg)?;
    let mix_cfg = MixConfig {
        ratio: MixRatio::new(80, 20)?,
        total: None,
        seed: derive_seed(seed, "mix"),
        sampling: Sampling::WithoutReplacement,
    };
    let (train, _) = mix(&clean, &augmented, &mix_cfg)?;
    let mut eval_spec = SyntheticSpec::new(n_eval, derive_seed(seed, "eval"), "ev");
    eval_spec.addsent = true;
    let eval = synthetic_corpus(&eval_spec)?;
    Ok((train, eval))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_lr_is_noop_and_runs_repeat() {
        let (train, eval) = toy_datasets(1, 60, 20).unwrap();
        let hyper = TrainHyper {
            epochs: 2,
            lr: 0.0,
            ..TrainHyper::default()
        };
        let r = toy_train(&train, &eval, &LossConfig::default(), &hyper).unwrap();
        assert_eq!(r.loss_curve[0], *r.loss_curve.last().unwrap());
        let hyper = TrainHyper {
            epochs: 2,
            ..TrainHyper::default()
        };
        let a = toy_train(&train, &eval, &LossConfig::default(), &hyper).unwrap();
        let b = toy_train(&train, &eval, &LossConfig::default(), &hyper).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn features_mark_gold_and_distractor() {
        let (_, eval) = toy_datasets(2, 10, 5).unwrap();
        let f = featurize(&eval.examples[0]);
        assert!(f.gold.0 >= 1 && f.gold.0 <= f.gold.1);
        assert_eq!(f.rows[0][1], 1.0);
        assert!(f.rows.iter().any(|r| r[7] == 1.0));
    }
}
