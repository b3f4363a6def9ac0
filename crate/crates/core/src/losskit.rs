//! Span losses with analytic gradients.
//!
//! - `qa_ce_loss`: start/end cross-entropy for one example.
//! - `weighted_batch_loss`: `(1/N_batch) * sum_i w_i * (l_start + l_end)`.
//! - `contrastive_loss`: `-log(exp(S_gold) / (exp(S_gold) + sum_j exp(S_neg_j)))`,
//!   where `S(a, b) = start[a] + end[b]`.
//! - `total_loss`: `(1 - alpha) * L_qa + alpha * L_con`, with `L_con` averaged over the
//!   examples that have at least one negative.
//!
//! Everything is f64. Null answers point at position 0 on both heads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::compensated_sum;

pub type Span = (usize, usize);

/// Logits and targets for one example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpanExample {
    pub start_logits: Vec<f64>,
    pub end_logits: Vec<f64>,
    pub gold: Span,
    pub weight: f64,
    /// Token spans of hard negatives, at most five, none equal to `gold`.
    pub negatives: Vec<Span>,
}

impl SpanExample {
    pub fn new(start_logits: Vec<f64>, end_logits: Vec<f64>, gold: Span) -> Self {
        SpanExample {
            start_logits,
            end_logits,
            gold,
            weight: 1.0,
            negatives: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.start_logits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.start_logits.is_empty()
    }

    fn check(&self) -> Result<()> {
        if self.start_logits.len() != self.end_logits.len() {
            return Err(Error::InvalidLossInput(format!(
                "start has {} logits, end has {}",
                self.start_logits.len(),
                self.end_logits.len()
            )));
        }
        if self.start_logits.iter().chain(&self.end_logits).any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteInput("logits"));
        }
        if !self.weight.is_finite() || self.weight < 0.0 {
            return Err(Error::NonFiniteInput("loss weight"));
        }
        let len = self.len();
        for &(s, e) in std::iter::once(&self.gold).chain(&self.negatives) {
            for i in [s, e] {
                if i >= len {
                    return Err(Error::OutOfBounds { index: i, len });
                }
            }
        }
        if self.negatives.contains(&self.gold) {
            return Err(Error::InvalidLossInput(format!(
                "negative {:?} equals the gold span",
                self.gold
            )));
        }
        Ok(())
    }
}

/// Gradient with respect to one example's logits.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SpanGrad {
    pub start: Vec<f64>,
    pub end: Vec<f64>,
}

impl SpanGrad {
    fn zeros(len: usize) -> Self {
        SpanGrad {
            start: vec![0.0; len],
            end: vec![0.0; len],
        }
    }

    fn add_scaled(&mut self, other: &SpanGrad, k: f64) {
        for (a, b) in self.start.iter_mut().zip(&other.start) {
            *a += k * b;
        }
        for (a, b) in self.end.iter_mut().zip(&other.end) {
            *a += k * b;
        }
    }

    fn scale(&mut self, k: f64) {
        self.start.iter_mut().chain(self.end.iter_mut()).for_each(|x| *x *= k);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossResult {
    pub value: f64,
    /// One entry per batch example.
    pub grads: Vec<SpanGrad>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LossConfig {
    pub alpha: f64,
    pub negation_weight: f64,
    pub entity_weight: f64,
}

impl Default for LossConfig {
    fn default() -> Self {
        LossConfig {
            alpha: 0.5,
            negation_weight: 3.0,
            entity_weight: 2.5,
        }
    }
}

impl LossConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        LossConfig {
            alpha,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be in [0, 1], got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `softmax(xs) - one_hot(target)` and `-log softmax(xs)[target]`.
fn ce_head(xs: &[f64], target: usize) -> (f64, Vec<f64>) {
    let lse = log_sum_exp(xs);
    let mut g: Vec<f64> = xs.iter().map(|x| (x - lse).exp()).collect();
    g[target] -= 1.0;
    (lse - xs[target], g)
}

/// Start plus end cross-entropy for one example.
pub fn qa_ce_loss(start_logits: &[f64], end_logits: &[f64], gold: Span) -> Result<(f64, SpanGrad)> {
    SpanExample::new(start_logits.to_vec(), end_logits.to_vec(), gold).check()?;
    let (ls, gs) = ce_head(start_logits, gold.0);
    let (le, ge) = ce_head(end_logits, gold.1);
    Ok((ls + le, SpanGrad { start: gs, end: ge }))
}

/// Weighted mean of per-example QA loss over the batch.
pub fn weighted_batch_loss(batch: &[SpanExample], config: &LossConfig) -> Result<LossResult> {
    config.validate()?;
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let n = batch.len() as f64;
    let mut terms = Vec::with_capacity(batch.len());
    let mut grads = Vec::with_capacity(batch.len());
    for ex in batch {
        ex.check()?;
        let (v, mut g) = qa_ce_loss(&ex.start_logits, &ex.end_logits, ex.gold)?;
        terms.push(ex.weight * v);
        g.scale(ex.weight / n);
        grads.push(g);
    }
    Ok(LossResult {
        value: compensated_sum(terms) / n,
        grads,
    })
}

/// `start[s] + end[e]`.
pub fn span_score(start_logits: &[f64], end_logits: &[f64], span: Span) -> Result<f64> {
    let len = start_logits.len().min(end_logits.len());
    for i in [span.0, span.1] {
        if i >= len {
            return Err(Error::OutOfBounds { index: i, len });
        }
    }
    Ok(start_logits[span.0] + end_logits[span.1])
}

/// Ranking loss of the gold span against the example's negatives. Zero without negatives.
pub fn contrastive_loss(example: &SpanExample) -> Result<(f64, SpanGrad)> {
    example.check()?;
    let mut grad = SpanGrad::zeros(example.len());
    if example.negatives.is_empty() {
        return Ok((0.0, grad));
    }
    let spans: Vec<Span> = std::iter::once(example.gold)
        .chain(example.negatives.iter().copied())
        .collect();
    let scores: Vec<f64> = spans
        .iter()
        .map(|&s| example.start_logits[s.0] + example.end_logits[s.1])
        .collect();
    let lse = log_sum_exp(&scores);
    for (k, (&(a, b), &s)) in spans.iter().zip(&scores).enumerate() {
        let d = (s - lse).exp() - if k == 0 { 1.0 } else { 0.0 };
        grad.start[a] += d;
        grad.end[b] += d;
    }
    Ok((lse - scores[0], grad))
}

/// Breakdown of [`total_loss`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TotalLoss {
    pub value: f64,
    pub qa: f64,
    pub contrastive: f64,
    /// Examples that contributed to the contrastive mean.
    pub n_contrastive: usize,
    pub grads: Vec<SpanGrad>,
}

/// `(1 - alpha) * weighted_batch_loss + alpha * mean contrastive loss`.
pub fn total_loss(batch: &[SpanExample], config: &LossConfig) -> Result<TotalLoss> {
    let qa = weighted_batch_loss(batch, config)?;
    let a = config.alpha;
    let rich: Vec<usize> = (0..batch.len()).filter(|&i| !batch[i].negatives.is_empty()).collect();
    let mut grads = qa.grads;
    for g in &mut grads {
        g.scale(1.0 - a);
    }
    let mut con_terms = Vec::with_capacity(rich.len());
    for &i in &rich {
        let (v, g) = contrastive_loss(&batch[i])?;
        con_terms.push(v);
        grads[i].add_scaled(&g, a / rich.len() as f64);
    }
    let contrastive = if rich.is_empty() {
        0.0
    } else {
        compensated_sum(con_terms) / rich.len() as f64
    };
    Ok(TotalLoss {
        value: (1.0 - a) * qa.value + a * contrastive,
        qa: qa.value,
        contrastive,
        n_contrastive: rich.len(),
        grads,
    })
}

/// Relative error of `analytic` against central differences of `f` at `x`:
/// `max_i |a_i - n_i| / max(max_i |a_i|, max_i |n_i|)`.
///
/// The error is taken relative to the gradient as a whole; per-component ratios are
/// dominated by finite-difference roundoff on entries near zero.
pub fn max_relative_error(analytic: &[f64], x: &[f64], h: f64, f: impl Fn(&[f64]) -> f64) -> f64 {
    let mut xp = x.to_vec();
    let mut diff = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..x.len() {
        xp[i] = x[i] + h;
        let up = f(&xp);
        xp[i] = x[i] - h;
        let down = f(&xp);
        xp[i] = x[i];
        let num = (up - down) / (2.0 * h);
        diff = diff.max((analytic[i] - num).abs());
        scale = scale.max(analytic[i].abs()).max(num.abs());
    }
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn flatten(batch: &[SpanExample]) -> Vec<f64> {
    batch
        .iter()
        .flat_map(|e| e.start_logits.iter().chain(&e.end_logits).copied())
        .collect()
}

fn unflatten(batch: &[SpanExample], x: &[f64]) -> Vec<SpanExample> {
    let mut off = 0;
    batch
        .iter()
        .map(|e| {
            let l = e.len();
            let mut out = e.clone();
            out.start_logits = x[off..off + l].to_vec();
            out.end_logits = x[off + l..off + 2 * l].to_vec();
            off += 2 * l;
            out
        })
        .collect()
}

fn flatten_grads(grads: &[SpanGrad]) -> Vec<f64> {
    grads
        .iter()
        .flat_map(|g| g.start.iter().chain(&g.end).copied())
        .collect()
}

/// Random example: length 2..=12, logits in [-4, 4], 0..=5 distinct negatives.
pub fn random_example(rng: &mut ChaCha8Rng) -> SpanExample {
    let len = rng.gen_range(2..=12);
    let logits = |rng: &mut ChaCha8Rng| (0..len).map(|_| rng.gen_range(-4.0..4.0)).collect::<Vec<f64>>();
    let s = logits(rng);
    let e = logits(rng);
    let span = |rng: &mut ChaCha8Rng| {
        let a = rng.gen_range(0..len);
        (a, rng.gen_range(a..len))
    };
    let gold = span(rng);
    let mut ex = SpanExample::new(s, e, gold);
    ex.weight = [1.0, 2.5, 3.0][rng.gen_range(0..3)];
    let want = rng.gen_range(0..=5);
    for _ in 0..want * 4 {
        if ex.negatives.len() == want {
            break;
        }
        let n = span(rng);
        if n != gold && !ex.negatives.contains(&n) {
            ex.negatives.push(n);
        }
    }
    ex
}

/// Outcome of one property in [`run_loss_checks`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

const FD_STEP: f64 = 1e-5;
const FD_TOL: f64 = 1e-6;

/// Gradient and closed-form checks over `instances` random inputs per loss.
pub fn run_loss_checks(seed: u64, instances: usize) -> Result<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut push = |name: &str, worst: f64, tol: f64| {
        out.push(CheckResult {
            name: name.to_string(),
            passed: worst <= tol,
            detail: format!("max error {worst:.3e} (tolerance {tol:.0e})"),
        });
    };

    let mut worst = [0.0f64; 4];
    for _ in 0..instances {
        let ex = random_example(&mut rng);
        let l = ex.len();
        let (_, g) = qa_ce_loss(&ex.start_logits, &ex.end_logits, ex.gold)?;
        let x = flatten(std::slice::from_ref(&ex));
        let f = |x: &[f64]| qa_ce_loss(&x[..l], &x[l..], ex.gold).map_or(f64::NAN, |r| r.0);
        worst[0] = worst[0].max(max_relative_error(&flatten_grads(&[g]), &x, FD_STEP, f));

        let (_, g) = contrastive_loss(&ex)?;
        let f = |x: &[f64]| contrastive_loss(&unflatten(std::slice::from_ref(&ex), x)[0]).map_or(f64::NAN, |r| r.0);
        worst[2] = worst[2].max(max_relative_error(&flatten_grads(&[g]), &x, FD_STEP, f));

        let n = rng.gen_range(1..=4);
        let batch: Vec<SpanExample> = std::iter::once(ex)
            .chain((1..n).map(|_| random_example(&mut rng)))
            .collect();
        let x = flatten(&batch);
        let cfg = LossConfig::default();
        let r = weighted_batch_loss(&batch, &cfg)?;
        let f = |x: &[f64]| weighted_batch_loss(&unflatten(&batch, x), &cfg).map_or(f64::NAN, |r| r.value);
        worst[1] = worst[1].max(max_relative_error(&flatten_grads(&r.grads), &x, FD_STEP, f));

        let cfg = LossConfig::with_alpha(rng.gen_range(0.0..=1.0));
        let r = total_loss(&batch, &cfg)?;
        let f = |x: &[f64]| total_loss(&unflatten(&batch, x), &cfg).map_or(f64::NAN, |r| r.value);
        worst[3] = worst[3].max(max_relative_error(&flatten_grads(&r.grads), &x, FD_STEP, f));
    }
    for (name, w) in ["qa_ce_loss", "weighted_batch_loss", "contrastive_loss", "total_loss"]
        .iter()
        .zip(worst)
    {
        push(&format!("gradient: {name}"), w, FD_TOL);
    }

    let (v, _) = qa_ce_loss(&[0.0; 4], &[0.0; 4], (1, 2))?;
    push("uniform cross-entropy = 2 ln 4", (v - 2.0 * 4f64.ln()).abs(), 1e-12);
    let mut ex = SpanExample::new(vec![0.0; 6], vec![0.0; 6], (0, 0));
    ex.negatives = (1..6).map(|i| (i, i)).collect();
    let (v, _) = contrastive_loss(&ex)?;
    push("uniform contrastive, 5 negatives = ln 6", (v - 6f64.ln()).abs(), 1e-12);
    ex.negatives.clear();
    let (v, g) = contrastive_loss(&ex)?;
    let mag = v.abs() + flatten_grads(&[g]).iter().map(|x| x.abs()).sum::<f64>();
    push("no negatives gives zero loss and gradient", mag, 0.0);

    let batch: Vec<SpanExample> = (0..6).map(|_| random_example(&mut rng)).collect();
    let qa = weighted_batch_loss(&batch, &LossConfig::default())?.value;
    let t0 = total_loss(&batch, &LossConfig::with_alpha(0.0))?;
    push("alpha = 0 equals weighted QA loss", (t0.value - qa).abs(), 0.0);
    let t1 = total_loss(&batch, &LossConfig::with_alpha(1.0))?;
    push(
        "alpha = 1 equals mean contrastive loss",
        (t1.value - t1.contrastive).abs(),
        0.0,
    );
    let th = total_loss(&batch, &LossConfig::with_alpha(0.5))?;
    let affine = (th.value - 0.5 * (t0.value + t1.value)).abs();
    push("total loss is affine in alpha", affine, 1e-12);

    let shifted: Vec<SpanExample> = batch
        .iter()
        .map(|e| {
            let mut e = e.clone();
            e.start_logits
                .iter_mut()
                .chain(e.end_logits.iter_mut())
                .for_each(|x| *x += 7.25);
            e
        })
        .collect();
    let mut shift_err = 0.0f64;
    for (a, b) in batch.iter().zip(&shifted) {
        shift_err = shift_err.max((contrastive_loss(a)?.0 - contrastive_loss(b)?.0).abs());
        shift_err = shift_err.max(
            (qa_ce_loss(&a.start_logits, &a.end_logits, a.gold)?.0
                - qa_ce_loss(&b.start_logits, &b.end_logits, b.gold)?.0)
                .abs(),
        );
    }
    push("shift invariance", shift_err, 1e-10);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let (v, _) = qa_ce_loss(&[0.0; 4], &[0.0; 4], (0, 3)).unwrap();
        assert!((v - 2.0 * 4f64.ln()).abs() < 1e-12);
        let mut s = vec![0.0; 5];
        s[2] = 50.0;
        let (v, _) = qa_ce_loss(&s, &s, (2, 2)).unwrap();
        assert!(v < 1e-20);
        assert_eq!(span_score(&[1.0, 2.0], &[0.5, 1.0], (1, 1)).unwrap(), 3.0);
        assert!(matches!(
            span_score(&[1.0], &[1.0], (0, 1)),
            Err(Error::OutOfBounds { .. })
        ));
    }

    #[test]
    fn input_errors() {
        assert!(matches!(
            qa_ce_loss(&[f64::NAN, 0.0], &[0.0, 0.0], (0, 0)),
            Err(Error::NonFiniteInput(_))
        ));
        assert!(matches!(
            qa_ce_loss(&[0.0], &[0.0, 0.0], (0, 0)),
            Err(Error::InvalidLossInput(_))
        ));
        assert!(matches!(
            weighted_batch_loss(&[], &LossConfig::default()),
            Err(Error::EmptyBatch)
        ));
        let mut ex = SpanExample::new(vec![0.0; 3], vec![0.0; 3], (1, 1));
        ex.negatives.push((1, 1));
        assert!(matches!(contrastive_loss(&ex), Err(Error::InvalidLossInput(_))));
        assert!(LossConfig::with_alpha(1.5).validate().is_err());
    }

    #[test]
    fn weights_scale_linearly() {
        let mut a = SpanExample::new(vec![0.3, -1.0, 2.0], vec![1.0, 0.0, -0.5], (2, 0));
        let b = a.clone();
        a.weight = 3.0;
        let r = weighted_batch_loss(&[a, b], &LossConfig::default()).unwrap();
        let (l, _) = qa_ce_loss(&[0.3, -1.0, 2.0], &[1.0, 0.0, -0.5], (2, 0)).unwrap();
        assert!((r.value - 2.0 * l).abs() < 1e-12);
        for (x, y) in r.grads[0].start.iter().zip(&r.grads[1].start) {
            assert!((x - 3.0 * y).abs() < 1e-15);
        }
    }

    #[test]
    fn library_checks_pass() {
        for c in run_loss_checks(11, 50).unwrap() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
