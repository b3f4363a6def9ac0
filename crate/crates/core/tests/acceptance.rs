//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each, and exits
//! non-zero if any failed.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use advqa_core::attacks::{generate, run_negation_pairs, AttackConfig, Templates, ENTITY_WEIGHT, NEGATION_WEIGHT};
use advqa_core::corpus::{parse_squad, read_augmented, write_augmented, Answer, CheckMode};
use advqa_core::entity::{mine_hard_negatives, MAX_NEGATIVES};
use advqa_core::losskit::{
    contrastive_loss, qa_ce_loss, total_loss, weighted_batch_loss, LossConfig, Span, SpanExample, SpanGrad,
};
use advqa_core::metrics::{exact_match, f1_score, gap_closure, GapReport};
use advqa_core::mixer::{mix, mix_sweep, MixConfig, MixRatio, Sampling};
use advqa_core::synthetic::{synthetic_corpus, SyntheticSpec};
use advqa_core::taxonomy::{analyze, classify_error};
use advqa_core::toy::{toy_datasets, toy_train, TrainHyper};
use advqa_core::{AttackType, Dataset, Origin, QAExample};
use common::{fixture_bytes, taxonomy_cases, taxonomy_dataset};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let ok: bool = $cond;
        if !ok {
            return Err(format!($($fmt)+));
        }
    };
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    ensure!(took < limit, "took {took:.2?}, limit {limit:?}");
    Ok(took)
}

// ---------------------------------------------------------------- 1

fn metric_fixtures() -> Outcome {
    let start = Instant::now();
    // (prediction, golds, EM, F1), all worked out by hand
    let cases: &[(&str, &[&str], u8, f64)] = &[
        ("the Denver Broncos", &["Denver Broncos"], 1, 1.0),
        ("Broncos", &["Denver Broncos"], 0, 2.0 / 3.0),
        ("24-10", &["24–10"], 1, 1.0),
        ("24-10", &["24 10"], 1, 1.0),
        ("2410", &["24-10"], 0, 0.0),
        ("DENVER BRONCOS!", &["Denver Broncos"], 1, 1.0),
        ("Broncos Denver", &["Denver Broncos"], 0, 1.0),
        ("Carolina Panthers", &["Denver Broncos"], 0, 0.0),
        ("Denver Broncos Denver", &["Denver Broncos"], 0, 0.8),
        ("Denver Denver", &["Denver"], 0, 2.0 / 3.0),
        ("Santa Clara, California", &["Levi's Stadium", "Santa Clara"], 0, 0.8),
        (
            "Levi's Stadium",
            &["Levi's Stadium in the San Francisco Bay Area"],
            0,
            6.0 / 11.0,
        ),
        ("The Panthers", &["Carolina Panthers", "Panthers"], 1, 1.0),
        (
            "Panthers",
            &["Carolina Panthers", "the Carolina Panthers team"],
            0,
            2.0 / 3.0,
        ),
        ("1998", &["in 1998"], 0, 2.0 / 3.0),
        ("$5 million", &["5 million dollars"], 0, 0.8),
        ("Zürich", &["zürich"], 1, 1.0),
        ("  an   apple ", &["Apple"], 1, 1.0),
        ("Denver", &["Denver Broncos", "Broncos"], 0, 2.0 / 3.0),
        ("the the Broncos", &["Broncos"], 1, 1.0),
        ("café", &["cafe"], 0, 0.0),
        ("New York-based", &["New York"], 0, 0.8),
        ("a an the", &["the"], 1, 1.0),
        ("", &["Denver"], 0, 0.0),
        ("", &[], 1, 1.0),
        ("Denver", &[], 0, 0.0),
    ];
    ensure!(cases.len() >= 20, "only {} fixtures", cases.len());
    for (pred, golds, em, f1) in cases {
        let got_em = exact_match(pred, golds);
        let got_f1 = f1_score(pred, golds);
        ensure!(got_em == *em, "EM({pred:?}, {golds:?}) = {got_em}, expected {em}");
        ensure!(
            (got_f1 - f1).abs() < 1e-12,
            "F1({pred:?}, {golds:?}) = {got_f1}, expected {f1}"
        );
    }
    let took = within(Duration::from_secs(1), start)?;
    Ok(format!("{} fixtures exact in {took:.2?}", cases.len()))
}

// ---------------------------------------------------------------- 2

fn gap_arithmetic() -> Outcome {
    let start = Instant::now();
    let baseline = GapReport::from_em(85.46, 68.90);
    let entity = GapReport::from_em(90.73, 89.89).with_baseline(baseline.gap);
    ensure!((baseline.gap + 16.56).abs() < 1e-12, "baseline gap {}", baseline.gap);
    ensure!((entity.gap + 0.84).abs() < 1e-12, "entity-aware gap {}", entity.gap);
    let closure = entity.closure.ok_or("no closure")?;
    ensure!((closure - 94.9).abs() <= 0.05, "closure {closure}");
    ensure!(gap_closure(0.0, -1.0).is_none(), "zero baseline gave a closure");
    let took = within(Duration::from_secs(1), start)?;
    Ok(format!(
        "gaps {:.2} / {:.2}, closure {closure:.3}% in {took:.2?}",
        baseline.gap, entity.gap
    ))
}

// ---------------------------------------------------------------- 3

/// Plain-softmax reference losses, written without log-sum-exp or shared helpers.
mod oracle {
    use super::*;

    pub fn ce(logits: &[f64], target: usize) -> f64 {
        let z: f64 = logits.iter().map(|x| x.exp()).sum();
        -(logits[target].exp() / z).ln()
    }

    pub fn qa(ex: &SpanExample) -> f64 {
        ce(&ex.start_logits, ex.gold.0) + ce(&ex.end_logits, ex.gold.1)
    }

    pub fn batch(b: &[SpanExample]) -> f64 {
        b.iter().map(|e| e.weight * qa(e)).sum::<f64>() / b.len() as f64
    }

    pub fn contrastive(ex: &SpanExample) -> f64 {
        if ex.negatives.is_empty() {
            return 0.0;
        }
        let s = |(a, b): Span| (ex.start_logits[a] + ex.end_logits[b]).exp();
        let gold = s(ex.gold);
        let negs: f64 = ex.negatives.iter().map(|&n| s(n)).sum();
        -(gold / (gold + negs)).ln()
    }

    pub fn total(b: &[SpanExample], alpha: f64) -> f64 {
        let rich: Vec<f64> = b.iter().filter(|e| !e.negatives.is_empty()).map(contrastive).collect();
        let con = if rich.is_empty() {
            0.0
        } else {
            rich.iter().sum::<f64>() / rich.len() as f64
        };
        (1.0 - alpha) * batch(b) + alpha * con
    }
}

fn random_span(rng: &mut ChaCha8Rng, len: usize) -> Span {
    let a = rng.gen_range(0..len);
    (a, rng.gen_range(a..len))
}

fn random_instance(rng: &mut ChaCha8Rng) -> SpanExample {
    let len = rng.gen_range(2..=10);
    let mut logits = || (0..len).map(|_| rng.gen_range(-3.0..3.0)).collect::<Vec<f64>>();
    let (s, e) = (logits(), logits());
    let gold = random_span(rng, len);
    let mut ex = SpanExample::new(s, e, gold);
    ex.weight = *[1.0, 2.5, 3.0].choose(rng).unwrap();
    let want = rng.gen_range(0..=MAX_NEGATIVES);
    for _ in 0..50 {
        if ex.negatives.len() == want {
            break;
        }
        let n = random_span(rng, len);
        if n != gold && !ex.negatives.contains(&n) {
            ex.negatives.push(n);
        }
    }
    ex
}

fn flat(batch: &[SpanExample]) -> Vec<f64> {
    batch
        .iter()
        .flat_map(|e| e.start_logits.iter().chain(&e.end_logits).copied())
        .collect()
}

fn with_logits(batch: &[SpanExample], x: &[f64]) -> Vec<SpanExample> {
    let mut off = 0;
    batch
        .iter()
        .map(|e| {
            let mut out = e.clone();
            let l = e.len();
            out.start_logits = x[off..off + l].to_vec();
            out.end_logits = x[off + l..off + 2 * l].to_vec();
            off += 2 * l;
            out
        })
        .collect()
}

fn flat_grads(g: &[SpanGrad]) -> Vec<f64> {
    g.iter().flat_map(|g| g.start.iter().chain(&g.end).copied()).collect()
}

/// Central differences of `f`, compared against `analytic` relative to the larger of
/// the two gradients' max norms.
fn fd_error(analytic: &[f64], x: &[f64], f: impl Fn(&[f64]) -> f64) -> f64 {
    const H: f64 = 1e-5;
    let mut numeric = Vec::with_capacity(x.len());
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        xp[i] = x[i] + H;
        let up = f(&xp);
        xp[i] = x[i] - H;
        let down = f(&xp);
        xp[i] = x[i];
        numeric.push((up - down) / (2.0 * H));
    }
    let inf = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, n)| a - n).collect();
    let scale = inf(analytic).max(inf(&numeric));
    if scale == 0.0 {
        inf(&diff)
    } else {
        inf(&diff) / scale
    }
}

fn gradient_check() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let instances = 100;
    let mut worst = [0.0f64; 4];
    let mut value_gap = 0.0f64;
    let mut rich_batches = 0;
    for _ in 0..instances {
        let ex = random_instance(&mut rng);
        let one = std::slice::from_ref(&ex);
        let x = flat(one);

        let (v, g) = qa_ce_loss(&ex.start_logits, &ex.end_logits, ex.gold).map_err(|e| e.to_string())?;
        value_gap = value_gap.max((v - oracle::qa(&ex)).abs());
        worst[0] = worst[0].max(fd_error(&flat_grads(&[g]), &x, |x| oracle::qa(&with_logits(one, x)[0])));

        let (v, g) = contrastive_loss(&ex).map_err(|e| e.to_string())?;
        value_gap = value_gap.max((v - oracle::contrastive(&ex)).abs());
        worst[2] = worst[2].max(fd_error(&flat_grads(&[g]), &x, |x| {
            oracle::contrastive(&with_logits(one, x)[0])
        }));

        let n = rng.gen_range(1..=4);
        let batch: Vec<SpanExample> = std::iter::once(ex)
            .chain((1..n).map(|_| random_instance(&mut rng)))
            .collect();
        if batch.iter().any(|e| !e.negatives.is_empty()) {
            rich_batches += 1;
        }
        let x = flat(&batch);
        let r = weighted_batch_loss(&batch, &LossConfig::default()).map_err(|e| e.to_string())?;
        value_gap = value_gap.max((r.value - oracle::batch(&batch)).abs());
        worst[1] = worst[1].max(fd_error(&flat_grads(&r.grads), &x, |x| {
            oracle::batch(&with_logits(&batch, x))
        }));

        let alpha = rng.gen_range(0.0..=1.0);
        let r = total_loss(&batch, &LossConfig::with_alpha(alpha)).map_err(|e| e.to_string())?;
        value_gap = value_gap.max((r.value - oracle::total(&batch, alpha)).abs());
        worst[3] = worst[3].max(fd_error(&flat_grads(&r.grads), &x, |x| {
            oracle::total(&with_logits(&batch, x), alpha)
        }));
    }
    let names = ["qa_ce_loss", "weighted_batch_loss", "contrastive_loss", "total_loss"];
    for (name, w) in names.iter().zip(worst) {
        ensure!(w <= 1e-6, "{name}: max relative error {w:.3e}");
    }
    ensure!(
        value_gap < 1e-10,
        "loss values differ from the reference by {value_gap:.3e}"
    );
    ensure!(
        rich_batches > instances / 2,
        "too few batches with negatives ({rich_batches})"
    );
    let took = within(Duration::from_secs(30), start)?;
    let worst_all = worst.iter().copied().fold(0.0, f64::max);
    Ok(format!(
        "{instances} instances x 4 losses, worst relative error {worst_all:.2e} in {took:.2?}"
    ))
}

// ---------------------------------------------------------------- 4

fn closed_forms() -> Outcome {
    for len in [2usize, 5, 17, 384] {
        for c in [0.0, -3.5, 12.25] {
            let l = vec![c; len];
            let (v, _) = qa_ce_loss(&l, &l, (0, len - 1)).map_err(|e| e.to_string())?;
            let want = 2.0 * (len as f64).ln();
            ensure!((v - want).abs() < 1e-12, "uniform CE L={len} c={c}: {v} vs {want}");
        }
    }
    let mut ex = SpanExample::new(vec![0.7; 6], vec![0.7; 6], (0, 0));
    ex.negatives = vec![(1, 1), (2, 2), (3, 3), (4, 4), (5, 5)];
    let (v, _) = contrastive_loss(&ex).map_err(|e| e.to_string())?;
    ensure!((v - 6f64.ln()).abs() < 1e-12, "uniform contrastive N=5: {v}");
    ex.negatives.clear();
    let (v, g) = contrastive_loss(&ex).map_err(|e| e.to_string())?;
    ensure!(v == 0.0 && flat_grads(&[g]).iter().all(|&x| x == 0.0), "N=0 gave {v}");

    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..50 {
        let batch: Vec<SpanExample> = (0..4).map(|_| random_instance(&mut rng)).collect();
        let qa = weighted_batch_loss(&batch, &LossConfig::default())
            .map_err(|e| e.to_string())?
            .value;
        let t0 = total_loss(&batch, &LossConfig::with_alpha(0.0)).map_err(|e| e.to_string())?;
        let t1 = total_loss(&batch, &LossConfig::with_alpha(1.0)).map_err(|e| e.to_string())?;
        ensure!((t0.value - qa).abs() < 1e-12, "alpha=0: {} vs {qa}", t0.value);
        ensure!(
            (t1.value - t1.contrastive).abs() < 1e-12,
            "alpha=1: {} vs {}",
            t1.value,
            t1.contrastive
        );
        let rich: Vec<f64> = batch
            .iter()
            .filter(|e| !e.negatives.is_empty())
            .map(|e| contrastive_loss(e).unwrap().0)
            .collect();
        let mean = if rich.is_empty() {
            0.0
        } else {
            rich.iter().sum::<f64>() / rich.len() as f64
        };
        ensure!(
            (t1.contrastive - mean).abs() < 1e-12,
            "contrastive mean {} vs {mean}",
            t1.contrastive
        );
    }
    Ok("uniform CE = 2 ln L, uniform N=5 = ln 6, N=0 = 0, alpha in {0, 1} identities".into())
}

// ---------------------------------------------------------------- 5

fn chars(s: &str, start: usize, len: usize) -> String {
    s.chars().skip(start).take(len).collect()
}

fn generate_per_attack(source: &Dataset, attack: AttackType, seed: u64, want: usize) -> Vec<(usize, QAExample)> {
    let templates = Templates::default();
    source
        .examples
        .iter()
        .enumerate()
        .filter_map(|(i, ex)| generate(attack, ex, seed ^ i as u64, &templates).ok().map(|g| (i, g)))
        .take(want)
        .collect()
}

fn augmentation_invariants() -> Outcome {
    let start = Instant::now();
    let mut spec = SyntheticSpec::new(2500, 31, "g");
    spec.negation_fraction = 0.05;
    let source = synthetic_corpus(&spec).map_err(|e| e.to_string())?;
    let build = start.elapsed();
    let start = Instant::now();
    let mut counts = Vec::new();
    for attack in AttackType::ALL {
        let made = generate_per_attack(&source, attack, 77, 1000);
        ensure!(made.len() == 1000, "{attack}: only {} examples generated", made.len());
        for (i, out) in &made {
            let src = &source.examples[*i];
            for a in &out.answers {
                ensure!(
                    chars(&out.context, a.answer_start, a.text.chars().count()) == a.text,
                    "{}: gold {:?} no longer at {}",
                    out.id,
                    a.text,
                    a.answer_start
                );
            }
            let want = match attack {
                AttackType::AdditiveNegation | AttackType::TransformativeNegation => NEGATION_WEIGHT,
                AttackType::EntitySubstitution => ENTITY_WEIGHT,
                _ => 1.0,
            };
            ensure!(out.loss_weight == want, "{}: weight {}", out.id, out.loss_weight);
            if attack == AttackType::TransformativeNegation {
                ensure!(
                    out.is_impossible && out.answers.is_empty(),
                    "{}: still answerable",
                    out.id
                );
            } else {
                ensure!(
                    out.context.starts_with(&src.context),
                    "{}: original context is not a prefix",
                    out.id
                );
                ensure!(out.answers == src.answers, "{}: answers changed", out.id);
            }
        }
        let bytes = |v: &[(usize, QAExample)]| {
            let ds = Dataset::new(v.iter().map(|p| p.1.clone()).collect(), "gen").unwrap();
            write_augmented(&ds).unwrap()
        };
        let again = generate_per_attack(&source, attack, 77, 1000);
        ensure!(bytes(&made) == bytes(&again), "{attack}: regeneration differs");
        counts.push(made.len());
    }
    let took = within(Duration::from_secs(10), start)?;
    Ok(format!(
        "{} attack types x 1000 examples, regenerated byte-identically in {took:.2?} (+{build:.2?} corpus build)",
        counts.len()
    ))
}

// ---------------------------------------------------------------- 6

fn negation_dataset_shape() -> Outcome {
    let start = Instant::now();
    let mut spec = SyntheticSpec::new(10_570, 9, "n");
    spec.negation_fraction = 0.076;
    let ds = synthetic_corpus(&spec).map_err(|e| e.to_string())?;
    let cfg = AttackConfig {
        negation_rate: 0.30,
        ..AttackConfig::default()
    };
    let (out, _) = run_negation_pairs(&ds, &cfg).map_err(|e| e.to_string())?;
    // recount from the output rather than trusting the report
    let size = 100.0 * out.len() as f64 / ds.len() as f64;
    let weighted = out.examples.iter().filter(|e| e.loss_weight == 3.0).count();
    let share = 100.0 * weighted as f64 / out.len() as f64;
    ensure!((size - 128.0).abs() <= 2.0, "size {size:.2}% of original");
    ensure!((share - 38.5).abs() <= 2.0, "weighted share {share:.2}%");
    let took = within(Duration::from_secs(30), start)?;
    Ok(format!(
        "{} -> {} examples ({size:.2}%), {weighted} weighted ({share:.2}%) in {took:.2?}",
        ds.len(),
        out.len()
    ))
}

// ---------------------------------------------------------------- 7

fn mixer_exactness() -> Outcome {
    let clean = synthetic_corpus(&SyntheticSpec::new(1000, 1, "c")).map_err(|e| e.to_string())?;
    let mut adv_spec = SyntheticSpec::new(500, 2, "a");
    adv_spec.addsent = true;
    let adv = synthetic_corpus(&adv_spec).map_err(|e| e.to_string())?;
    let cfg = MixConfig {
        ratio: MixRatio::new(80, 20).unwrap(),
        total: Some(1000),
        seed: 13,
        sampling: Sampling::WithoutReplacement,
    };
    let (ds, _) = mix(&clean, &adv, &cfg).map_err(|e| e.to_string())?;
    let n_clean = ds.examples.iter().filter(|e| e.origin == Origin::Clean).count();
    let n_adv = ds.examples.iter().filter(|e| e.origin == Origin::Addsent).count();
    ensure!((n_clean, n_adv) == (800, 200), "80-20 of 1000 gave {n_clean}/{n_adv}");
    let ids: BTreeSet<&str> = ds.examples.iter().map(|e| e.id.as_str()).collect();
    ensure!(ids.len() == ds.len(), "duplicate ids");
    let again = mix(&clean, &adv, &cfg).map_err(|e| e.to_string())?.0;
    ensure!(
        write_augmented(&ds).unwrap() == write_augmented(&again).unwrap(),
        "same seed, different bytes"
    );

    let base = MixConfig {
        total: Some(100),
        ..cfg
    };
    let sweep = mix_sweep(&clean, &adv, &MixRatio::sweep(), &base).map_err(|e| e.to_string())?;
    let per_hundred: Vec<usize> = sweep
        .iter()
        .map(|(_, d, _)| d.examples.iter().filter(|e| e.origin == Origin::Clean).count())
        .collect();
    ensure!(
        per_hundred == [90, 80, 70, 60, 50],
        "sweep clean counts {per_hundred:?}"
    );
    for (r, d, _) in &sweep {
        let ids: BTreeSet<&str> = d.examples.iter().map(|e| e.id.as_str()).collect();
        ensure!(ids.len() == d.len(), "{r}: duplicate ids");
    }
    Ok(format!(
        "800/200, sweep {per_hundred:?}, unique ids, deterministic bytes"
    ))
}

// ---------------------------------------------------------------- 8

fn hard_negative_contracts() -> Outcome {
    let ctx = "The company was founded in 1998. It was acquired by a larger corporation in 2015. \
               The acquisition was completed in 2016, marking a new era.";
    let mut ex = QAExample::new(
        "fixture",
        "When was the company acquired?",
        ctx,
        vec![Answer {
            text: "2015".into(),
            answer_start: ctx.find("2015").unwrap(),
        }],
    );
    let set = mine_hard_negatives(&mut ex).ok_or("no set for the year fixture")?;
    let got: BTreeSet<&str> = set.negatives.iter().map(|n| n.surface.as_str()).collect();
    ensure!(got == BTreeSet::from(["1998", "2016"]), "fixture negatives {got:?}");

    let mut rng = ChaCha8Rng::seed_from_u64(88);
    let fillers = ["then", "and after that", "followed by a quiet stretch until", "or"];
    let rounds = 300;
    let mut checked = 0;
    for round in 0..rounds {
        let mut years: Vec<u32> = (1800..2000).collect();
        years.shuffle(&mut rng);
        let years = &years[..7];
        let mut ctx = String::from("The archive lists");
        let mut starts = Vec::new();
        for (k, y) in years.iter().enumerate() {
            ctx.push(' ');
            starts.push(ctx.chars().count());
            ctx.push_str(&y.to_string());
            if k < 6 {
                ctx.push(' ');
                ctx.push_str(fillers.choose(&mut rng).unwrap());
            }
        }
        ctx.push('.');
        let g = rng.gen_range(0..7);
        let (gs, ge) = (starts[g], starts[g] + 4);
        let mut ex = QAExample::new(
            format!("y{round}"),
            "In which year?",
            ctx.clone(),
            vec![Answer {
                text: years[g].to_string(),
                answer_start: gs,
            }],
        );
        let set = mine_hard_negatives(&mut ex).ok_or_else(|| format!("no set: {ctx}"))?;
        let mut oracle: Vec<(usize, usize, String)> = (0..7)
            .filter(|&k| k != g)
            .map(|k| {
                let (s, e) = (starts[k], starts[k] + 4);
                (if e <= gs { gs - e } else { s - ge }, s, years[k].to_string())
            })
            .collect();
        oracle.sort();
        let want: Vec<String> = oracle.into_iter().take(5).map(|t| t.2).collect();
        let got: Vec<String> = set.negatives.iter().map(|n| n.surface.clone()).collect();
        ensure!(got == want, "{ctx}: kept {got:?}, nearest five {want:?}");
        set.check().map_err(|e| format!("{ctx}: {e}"))?;
        checked += 1;
    }

    let mut spec = SyntheticSpec::new(500, 3, "h");
    spec.addsent = true;
    let mut sets = 0;
    for mut ex in synthetic_corpus(&spec).map_err(|e| e.to_string())?.examples {
        if let Some(set) = mine_hard_negatives(&mut ex) {
            set.check().map_err(|e| format!("{}: {e}", ex.id))?;
            ensure!(set.negatives.len() <= MAX_NEGATIVES, "{}: too many negatives", ex.id);
            let (gs, ge) = (set.answer_span.char_start, set.answer_span.char_end);
            for n in &set.negatives {
                ensure!(n.entity_type == set.answer_span.entity_type, "{}: type mismatch", ex.id);
                ensure!(
                    n.char_end <= gs || n.char_start >= ge,
                    "{}: negative overlaps gold",
                    ex.id
                );
            }
            sets += 1;
        }
    }
    Ok(format!(
        "year fixture exact, {checked} seven-date contexts match the oracle, {sets} corpus sets valid"
    ))
}

// ---------------------------------------------------------------- 9

fn taxonomy_agreement() -> Outcome {
    let cases = taxonomy_cases();
    ensure!(cases.len() == 50, "{} cases", cases.len());
    let mismatches: Vec<String> = cases
        .iter()
        .flat_map(|c| c.mismatches(&classify_error(&c.example(), &c.prediction)))
        .collect();
    ensure!(
        mismatches.is_empty(),
        "{} disagreements: {}",
        mismatches.len(),
        mismatches.join("; ")
    );
    let (ds, preds) = taxonomy_dataset(&cases);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| analyze(&ds, &preds).unwrap())
    };
    let one = run(1);
    for t in [2, 4, 8] {
        ensure!(run(t) == one, "{t} threads changed the analysis");
    }
    Ok("50/50 cases agree on all five schemes; identical on 1/2/4/8 threads".into())
}

// ---------------------------------------------------------------- 10

fn toy_separation() -> Outcome {
    let start = Instant::now();
    let (train, eval) = toy_datasets(0, 400, 300).map_err(|e| e.to_string())?;
    let hyper = TrainHyper::default();
    let base = toy_train(&train, &eval, &LossConfig::with_alpha(0.0), &hyper).map_err(|e| e.to_string())?;
    let con = toy_train(&train, &eval, &LossConfig::with_alpha(0.5), &hyper).map_err(|e| e.to_string())?;
    for r in [&base, &con] {
        let (first, last) = (r.loss_curve[0], *r.loss_curve.last().unwrap());
        ensure!(last < first, "alpha={}: loss {first} -> {last}", r.alpha);
    }
    ensure!(
        con.ranking_accuracy > base.ranking_accuracy,
        "ranking accuracy alpha=0.5 {:.2}% vs alpha=0 {:.2}%",
        con.ranking_accuracy,
        base.ranking_accuracy
    );
    let took = within(Duration::from_secs(120), start)?;
    Ok(format!(
        "ranking accuracy {:.2}% (alpha=0.5) vs {:.2}% (alpha=0) over {} examples in {took:.2?}",
        con.ranking_accuracy, base.ranking_accuracy, con.ranked_examples
    ))
}

// ---------------------------------------------------------------- 11

fn round_trip() -> Outcome {
    let mut checked = Vec::new();
    let mut fixed_point = |label: &str, ds: &Dataset| -> Result<(), String> {
        let once = write_augmented(ds).map_err(|e| e.to_string())?;
        let back = read_augmented(&once).map_err(|e| format!("{label}: {e}"))?;
        ensure!(back.examples == ds.examples, "{label}: fields changed");
        ensure!(write_augmented(&back).unwrap() == once, "{label}: not a fixed point");
        checked.push(label.to_string());
        Ok(())
    };
    let strict = parse_squad(&fixture_bytes("squad_small.json"), CheckMode::Strict).map_err(|e| e.to_string())?;
    fixed_point("squad_small", &strict.value)?;
    let lenient =
        parse_squad(&fixture_bytes("squad_bad_offset.json"), CheckMode::Lenient).map_err(|e| e.to_string())?;
    fixed_point("squad_bad_offset", &lenient.value)?;
    fixed_point("taxonomy_cases", &taxonomy_dataset(&taxonomy_cases()).0)?;

    let mut spec = SyntheticSpec::new(300, 5, "r");
    spec.negation_fraction = 0.1;
    let src = synthetic_corpus(&spec).map_err(|e| e.to_string())?;
    let mut generated: Vec<QAExample> = AttackType::ALL
        .iter()
        .flat_map(|&a| generate_per_attack(&src, a, 3, 40).into_iter().map(|p| p.1))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for ex in &mut generated {
        ex.loss_weight = rng.gen_range(1e-6..1e3);
        ex.is_entity_rich = rng.gen();
    }
    fixed_point("generated", &Dataset::new(generated, "gen").map_err(|e| e.to_string())?)?;
    Ok(format!("fixed point and lossless fields on {}", checked.join(", ")))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("metric oracle suite", metric_fixtures),
        ("gap arithmetic", gap_arithmetic),
        ("gradient verification", gradient_check),
        ("closed-form loss checks", closed_forms),
        ("augmentation invariants", augmentation_invariants),
        ("negation dataset shape", negation_dataset_shape),
        ("mixer exactness", mixer_exactness),
        ("hard-negative contracts", hard_negative_contracts),
        ("taxonomy fixture agreement", taxonomy_agreement),
        ("toy-train separation", toy_separation),
        ("round-trip fidelity", round_trip),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
