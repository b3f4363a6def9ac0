//! Seeded mixing of clean and adversarial datasets at a fixed ratio.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, Origin, QAExample};
use crate::error::{Error, Result};
use crate::text::derive_seed;

/// Clean:adversarial composition, e.g. 80-20. Stored as integer parts so counts are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MixRatio {
    pub clean: u32,
    pub adversarial: u32,
}

impl MixRatio {
    pub fn new(clean: u32, adversarial: u32) -> Result<Self> {
        if clean == 0 || adversarial == 0 {
            return Err(Error::InvalidConfig(format!(
                "mixing ratio {clean}-{adversarial} must have both parts positive"
            )));
        }
        Ok(MixRatio { clean, adversarial })
    }

    /// The five ratios 90-10 through 50-50.
    pub fn sweep() -> Vec<MixRatio> {
        [(90, 10), (80, 20), (70, 30), (60, 40), (50, 50)]
            .into_iter()
            .map(|(c, a)| MixRatio {
                clean: c,
                adversarial: a,
            })
            .collect()
    }

    fn denom(&self) -> u64 {
        u64::from(self.clean) + u64::from(self.adversarial)
    }

    pub fn clean_fraction(&self) -> f64 {
        f64::from(self.clean) / self.denom() as f64
    }

    /// Clean count for a total, rounding half up; the adversarial count is the remainder.
    pub fn split(&self, total: usize) -> (usize, usize) {
        let t = total as u64;
        let d = self.denom();
        let clean = (2 * u64::from(self.clean) * t + d) / (2 * d);
        (clean as usize, total - clean as usize)
    }

    /// Adversarial count that pairs with `clean` examples, rounding half up.
    pub fn adversarial_for(&self, clean: usize) -> usize {
        let n = 2 * u64::from(self.adversarial) * clean as u64 + u64::from(self.clean);
        (n / (2 * u64::from(self.clean))) as usize
    }
}

impl fmt::Display for MixRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.clean, self.adversarial)
    }
}

impl FromStr for MixRatio {
    type Err = Error;

    /// Accepts "80-20", "80:20" or a clean fraction such as "0.8".
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("cannot parse mixing ratio {s:?}"));
        let s = s.trim();
        if let Some((a, b)) = s.split_once(['-', ':']) {
            let a = a.trim().parse().map_err(|_| bad())?;
            let b = b.trim().parse().map_err(|_| bad())?;
            return MixRatio::new(a, b);
        }
        let f: f64 = s.parse().map_err(|_| bad())?;
        if !(f > 0.0 && f < 1.0) {
            return Err(bad());
        }
        let c = (f * 1000.0).round() as u32;
        MixRatio::new(c, 1000 - c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampling {
    #[default]
    WithoutReplacement,
    WithReplacementIfShort,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixConfig {
    pub ratio: MixRatio,
    /// Output size. When absent, all clean examples are kept and the adversarial
    /// count is solved from the ratio.
    pub total: Option<usize>,
    pub seed: u64,
    pub sampling: Sampling,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixStats {
    pub ratio: String,
    pub requested_clean: usize,
    pub requested_adversarial: usize,
    pub clean: usize,
    pub adversarial: usize,
    pub total: usize,
    /// Examples drawn a second time because supply was short.
    pub resampled: usize,
    pub achieved_clean_pct: f64,
    pub achieved_adversarial_pct: f64,
    pub origins: BTreeMap<String, usize>,
}

fn draw(
    pool: &[QAExample],
    n: usize,
    allow_repeat: bool,
    what: &'static str,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<QAExample>, usize)> {
    if n <= pool.len() {
        let picked = index::sample(rng, pool.len(), n);
        return Ok((picked.iter().map(|i| pool[i].clone()).collect(), 0));
    }
    if !allow_repeat {
        return Err(Error::InsufficientData {
            what,
            needed: n,
            available: pool.len(),
        });
    }
    let mut out = pool.to_vec();
    let extra = n - pool.len();
    let mut copies: BTreeMap<usize, usize> = BTreeMap::new();
    for _ in 0..extra {
        let i = rng.gen_range(0..pool.len());
        let k = copies.entry(i).or_insert(1);
        *k += 1;
        let mut ex = pool[i].clone();
        ex.id = format!("{}#{}", ex.id, k);
        out.push(ex);
    }
    Ok((out, extra))
}

/// Mix `clean` and `adversarial` at `config.ratio`, then shuffle.
///
/// Clean examples are tagged `clean`; adversarial examples that are not already
/// tagged keep their own origin, and untagged ones become `addsent`.
pub fn mix(clean: &Dataset, adversarial: &Dataset, config: &MixConfig) -> Result<(Dataset, MixStats)> {
    if clean.is_empty() || adversarial.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let repeat = config.sampling == Sampling::WithReplacementIfShort;
    let (want_clean, want_adv) = match config.total {
        Some(t) => config.ratio.split(t),
        None => (clean.len(), config.ratio.adversarial_for(clean.len())),
    };
    let adv_n = if config.total.is_none() && !repeat {
        want_adv.min(adversarial.len())
    } else {
        want_adv
    };
    let (mut c, r1) = draw(&clean.examples, want_clean, repeat, "clean", &mut rng)?;
    let (mut a, r2) = draw(&adversarial.examples, adv_n, repeat, "adversarial", &mut rng)?;
    if adv_n < want_adv {
        log::warn!(
            "only {} adversarial examples for a requested {want_adv}; keeping all",
            adversarial.len()
        );
    }
    for ex in &mut c {
        ex.origin = Origin::Clean;
    }
    for ex in &mut a {
        if ex.origin == Origin::Clean {
            ex.origin = Origin::Addsent;
        }
    }
    let (nc, na) = (c.len(), a.len());
    c.append(&mut a);
    c.shuffle(&mut rng);
    let mut origins = BTreeMap::new();
    for ex in &c {
        let key = serde_json::to_value(ex.origin)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        *origins.entry(key).or_insert(0) += 1;
    }
    let total = nc + na;
    let stats = MixStats {
        ratio: config.ratio.to_string(),
        requested_clean: want_clean,
        requested_adversarial: want_adv,
        clean: nc,
        adversarial: na,
        total,
        resampled: r1 + r2,
        achieved_clean_pct: 100.0 * nc as f64 / total as f64,
        achieved_adversarial_pct: 100.0 * na as f64 / total as f64,
        origins,
    };
    let ds = Dataset::new(c, format!("mix-{}", config.ratio))?;
    Ok((ds, stats))
}

/// Run [`mix`] once per ratio. Each ratio gets its own seed derived from `base.seed`.
pub fn mix_sweep(
    clean: &Dataset,
    adversarial: &Dataset,
    ratios: &[MixRatio],
    base: &MixConfig,
) -> Result<Vec<(MixRatio, Dataset, MixStats)>> {
    ratios
        .iter()
        .map(|&ratio| {
            let cfg = MixConfig {
                ratio,
                seed: derive_seed(base.seed, &ratio.to_string()),
                ..base.clone()
            };
            mix(clean, adversarial, &cfg).map(|(d, s)| (ratio, d, s))
        })
        .collect()
}
