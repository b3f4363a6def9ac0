//! Adversarial attack generators, negation contrastive pairs and entity substitution.
//!
//! Every attack except transformative negation appends one sentence at the end of
//! the context, so original answer offsets stay valid and the appended range is
//! recorded in `distractor_spans`. All randomness comes from per-example seeds
//! derived from `(global seed, example id)`, which makes output independent of
//! processing order.

use std::collections::BTreeMap;
use std::fmt;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{AttackType, Dataset, Origin, QAExample};
use crate::entity::{entity_type_of, extract_entities, mine_hard_negatives, EntitySpan, EntityType, HardNegativeSet};
use crate::error::{Error, Result};
use crate::metrics::normalize_answer;
use crate::text::{char_len, char_slice, derive_seed, round_count, sentence_index, sentence_spans, words, CharIndex};

pub const NEGATION_WEIGHT: f64 = 3.0;
pub const ENTITY_WEIGHT: f64 = 2.5;

const DISTRACTOR: &str = "{distractor}";
const VERB: &str = "{verb}";
const ADDITIVE_FALLBACK: &str = "Some claim this is not true.";

/// Why a generator declined an example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    NoAnswer,
    NoDistractorCandidate,
    NoAlternativeEntity,
    NoNumber,
    UnsupportedVerbShape,
    NoHardNegatives,
    HasNegation,
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SkipReason::NoAnswer => "no_answer",
            SkipReason::NoDistractorCandidate => "no_distractor_candidate",
            SkipReason::NoAlternativeEntity => "no_alternative_entity",
            SkipReason::NoNumber => "no_number",
            SkipReason::UnsupportedVerbShape => "unsupported_verb_shape",
            SkipReason::NoHardNegatives => "no_hard_negatives",
            SkipReason::HasNegation => "has_negation",
        };
        f.write_str(s)
    }
}

pub type Generated = std::result::Result<QAExample, SkipReason>;

/// Template strings per attack. `{distractor}` is replaced by the injected value;
/// the additive-negation template uses `{verb}` for the base verb of the answer sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Templates(pub BTreeMap<AttackType, Vec<String>>);

impl Default for Templates {
    fn default() -> Self {
        let t = |s: &str| vec![s.to_string()];
        Templates(BTreeMap::from([
            (
                AttackType::Paraphrase,
                t("Some might argue it was {distractor}, though this is debated."),
            ),
            (
                AttackType::EntitySwap,
                t("However, some records indicate {distractor} instead."),
            ),
            (
                AttackType::NegationAttack,
                t("Contrary to popular belief, {distractor} is not the correct answer."),
            ),
            (
                AttackType::NumericAttack,
                t("Some sources cite {distractor} as an alternative figure."),
            ),
            (AttackType::AdditiveNegation, t("Some claim they didn't {verb}.")),
            (
                AttackType::EntitySubstitution,
                t("However, some records indicate {distractor} instead."),
            ),
        ]))
    }
}

impl Templates {
    fn pick(&self, attack: AttackType, rng: &mut ChaCha8Rng) -> &str {
        self.0
            .get(&attack)
            .and_then(|v| v.choose(rng))
            .map_or("", String::as_str)
    }
}

fn default_attacks() -> Vec<AttackType> {
    vec![
        AttackType::Paraphrase,
        AttackType::EntitySwap,
        AttackType::NegationAttack,
        AttackType::NumericAttack,
    ]
}

fn default_reference() -> BTreeMap<String, usize> {
    BTreeMap::from([
        ("paraphrase".to_string(), 217),
        ("entity_swap".to_string(), 211),
        ("negation_attack".to_string(), 221),
        ("numeric_attack".to_string(), 66),
        ("total".to_string(), 715),
    ])
}

/// Attack configuration, loadable from TOML:
///
/// ```toml
/// seed = 7
/// attacks = ["paraphrase", "entity_swap", "negation_attack", "numeric_attack"]
/// augmentation_rate = 0.40   # share of eligible examples attacked
/// negation_rate = 0.30       # share of negation-free examples given a contrastive pair
/// entity_rate = 0.20         # share of entity-rich examples given a substitution
///
/// [templates]
/// paraphrase = ["Some might argue it was {distractor}, though this is debated."]
///
/// [reference_counts]         # optional expected counts echoed in the report
/// total = 715
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AttackConfig {
    pub seed: u64,
    pub attacks: Vec<AttackType>,
    pub augmentation_rate: f64,
    pub negation_rate: f64,
    pub entity_rate: f64,
    pub templates: Templates,
    pub reference_counts: BTreeMap<String, usize>,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            seed: 0,
            attacks: default_attacks(),
            augmentation_rate: 0.40,
            negation_rate: 0.30,
            entity_rate: 0.20,
            templates: Templates::default(),
            reference_counts: default_reference(),
        }
    }
}

impl AttackConfig {
    /// Parse TOML; missing templates fall back to the built-in set.
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut cfg: AttackConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        for (k, v) in Templates::default().0 {
            cfg.templates.0.entry(k).or_insert(v);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("augmentation_rate", self.augmentation_rate),
            ("negation_rate", self.negation_rate),
            ("entity_rate", self.entity_rate),
        ] {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::InvalidConfig(format!("{name} must be in (0, 1], got {r}")));
            }
        }
        if self.attacks.is_empty() {
            return Err(Error::InvalidConfig("no attacks enabled".into()));
        }
        for a in &self.attacks {
            if *a == AttackType::TransformativeNegation {
                continue;
            }
            let placeholder = if *a == AttackType::AdditiveNegation {
                VERB
            } else {
                DISTRACTOR
            };
            match self.templates.0.get(a) {
                Some(ts) if !ts.is_empty() => {
                    if let Some(bad) = ts.iter().find(|t| !t.contains(placeholder)) {
                        return Err(Error::InvalidConfig(format!(
                            "template {bad:?} for {a} lacks {placeholder}"
                        )));
                    }
                }
                _ => return Err(Error::InvalidConfig(format!("attack {a} has no template"))),
            }
        }
        Ok(())
    }
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Append `sentence` to the context and record its range as a distractor span.
fn append_sentence(example: &QAExample, sentence: &str, attack: AttackType) -> QAExample {
    let mut out = example.clone();
    let sep = if out.context.is_empty() || out.context.ends_with(char::is_whitespace) {
        ""
    } else {
        " "
    };
    let start = char_len(&out.context) + sep.len();
    out.context.push_str(sep);
    out.context.push_str(sentence);
    out.distractor_spans.push((start, start + char_len(sentence)));
    tag(&mut out, attack);
    out
}

fn tag(out: &mut QAExample, attack: AttackType) {
    out.id = format!("{}-{}", out.id, attack);
    out.origin = Origin::Augmented;
    out.attack_type = Some(attack);
    out.loss_weight = 1.0;
    out.is_negation = false;
}

fn gold_span(example: &QAExample) -> Option<(usize, usize, &str)> {
    example
        .answers
        .first()
        .map(|a| (a.answer_start, a.answer_start + char_len(&a.text), a.text.as_str()))
}

/// Integer value of the first digit run in `text`, with thousands separators removed.
fn first_integer(text: &str) -> Option<(u64, usize)> {
    let w = words(text)
        .into_iter()
        .find(|w| w.text.chars().all(|c| c.is_ascii_digit()))?;
    let digits = w.text.len();
    w.text.parse::<u64>().ok().map(|v| (v, digits))
}

/// Perturb a number: years move by 1 to 3, other values by about 10% or by swapping
/// two adjacent digits. The result always differs from the input.
pub fn perturb_number(value: u64, digits: usize, rng: &mut ChaCha8Rng) -> u64 {
    let sign_up = rng.gen_bool(0.5);
    if digits == 4 && (1000..=2999).contains(&value) {
        let d: u64 = rng.gen_range(1..=3);
        return if sign_up { value + d } else { value - d };
    }
    let ten_percent = |up: bool| {
        let d = ((value as f64 * 0.1).round() as u64).max(1);
        if up || value < d {
            value + d
        } else {
            value - d
        }
    };
    if rng.gen_bool(0.5) {
        return ten_percent(sign_up);
    }
    let s: Vec<char> = value.to_string().chars().collect();
    let swaps: Vec<usize> = (0..s.len().saturating_sub(1))
        .filter(|&i| s[i] != s[i + 1] && !(i == 0 && s[1] == '0'))
        .collect();
    match swaps.choose(rng) {
        Some(&i) => {
            let mut t = s.clone();
            t.swap(i, i + 1);
            t.iter()
                .collect::<String>()
                .parse()
                .unwrap_or_else(|_| ten_percent(sign_up))
        }
        None => ten_percent(sign_up),
    }
}

fn same_type_negatives(example: &QAExample) -> Vec<EntitySpan> {
    let mut probe = example.clone();
    mine_hard_negatives(&mut probe).map(|s| s.negatives).unwrap_or_default()
}

/// A same-type entity from the context, else a perturbed copy of a numeric answer.
fn distractor_candidate(example: &QAExample, rng: &mut ChaCha8Rng) -> Option<String> {
    let (_, _, gold) = gold_span(example)?;
    let negs = same_type_negatives(example);
    if let Some(n) = negs.choose(rng) {
        return Some(n.surface.clone());
    }
    let (v, digits) = first_integer(gold)?;
    Some(perturb_number(v, digits, rng).to_string())
}

fn distractor_attack(example: &QAExample, seed: u64, templates: &Templates, attack: AttackType) -> Generated {
    if example.answers.is_empty() {
        return Err(SkipReason::NoAnswer);
    }
    let mut rng = rng_for(seed);
    let value = distractor_candidate(example, &mut rng).ok_or(SkipReason::NoDistractorCandidate)?;
    let sentence = templates.pick(attack, &mut rng).replace(DISTRACTOR, &value);
    Ok(append_sentence(example, &sentence, attack))
}

/// Append a hedging sentence that floats a distractor value.
pub fn gen_paraphrase_attack(example: &QAExample, seed: u64, templates: &Templates) -> Generated {
    distractor_attack(example, seed, templates, AttackType::Paraphrase)
}

/// Append an explicit negation of a distractor value.
pub fn gen_negation_attack(example: &QAExample, seed: u64, templates: &Templates) -> Generated {
    distractor_attack(example, seed, templates, AttackType::NegationAttack)
}

const SALIENCE: [EntityType; 6] = [
    EntityType::Person,
    EntityType::Organization,
    EntityType::Location,
    EntityType::Facility,
    EntityType::Event,
    EntityType::Misc,
];

/// Append a sentence asserting a wrong entity.
///
/// A named-entity answer swaps to another entity of its own type. Otherwise (or when
/// no such entity exists) the most salient named entity not mentioned in the question
/// is used, preferring people, then organizations, locations, facilities, events.
pub fn gen_entity_swap_attack(example: &QAExample, seed: u64, templates: &Templates) -> Generated {
    let (gs, ge, gold) = gold_span(example).ok_or(SkipReason::NoAnswer)?;
    let gold_key = normalize_answer(gold);
    let entities = extract_entities(&example.context);
    let gold_type = entities
        .iter()
        .find(|e| e.char_start == gs && e.char_end == ge)
        .map(|e| e.entity_type)
        .or_else(|| entity_type_of(gold));
    let q_key = format!(" {} ", normalize_answer(&example.question).join(" "));
    let usable: Vec<&EntitySpan> = entities
        .iter()
        .filter(|e| !e.overlaps(gs, ge) && normalize_answer(&e.surface) != gold_key)
        .collect();
    let mut rng = rng_for(seed);
    let same: Vec<&EntitySpan> = match gold_type {
        Some(t) if t.is_named() => usable.iter().copied().filter(|e| e.entity_type == t).collect(),
        _ => Vec::new(),
    };
    let pool: Vec<&EntitySpan> = if same.is_empty() {
        let salient: Vec<&EntitySpan> = usable
            .iter()
            .copied()
            .filter(|e| e.entity_type.is_named())
            .filter(|e| !q_key.contains(&format!(" {} ", normalize_answer(&e.surface).join(" "))))
            .collect();
        SALIENCE
            .iter()
            .map(|t| {
                salient
                    .iter()
                    .copied()
                    .filter(|e| e.entity_type == *t)
                    .collect::<Vec<_>>()
            })
            .find(|g| !g.is_empty())
            .unwrap_or_default()
    } else {
        same
    };
    let chosen = pool.choose(&mut rng).ok_or(SkipReason::NoAlternativeEntity)?;
    let sentence = templates
        .pick(AttackType::EntitySwap, &mut rng)
        .replace(DISTRACTOR, &chosen.surface);
    Ok(append_sentence(example, &sentence, AttackType::EntitySwap))
}

/// Append a sentence citing a perturbed version of the answer's number, or of a
/// number from the context when the answer has none.
pub fn gen_numeric_attack(example: &QAExample, seed: u64, templates: &Templates) -> Generated {
    let (_, _, gold) = gold_span(example).ok_or(SkipReason::NoAnswer)?;
    let mut rng = rng_for(seed);
    let (value, digits) = match first_integer(gold) {
        Some(x) => x,
        None => {
            let nums: Vec<(u64, usize)> = words(&example.context)
                .into_iter()
                .filter(|w| w.text.chars().all(|c| c.is_ascii_digit()))
                .filter_map(|w| w.text.parse().ok().map(|v| (v, w.text.len())))
                .collect();
            *nums.choose(&mut rng).ok_or(SkipReason::NoNumber)?
        }
    };
    let perturbed = perturb_number(value, digits, &mut rng);
    let sentence = templates
        .pick(AttackType::NumericAttack, &mut rng)
        .replace(DISTRACTOR, &perturbed.to_string());
    Ok(append_sentence(example, &sentence, AttackType::NumericAttack))
}

const COPULAS: &[&str] = &["is", "are", "was", "were"];

const IRREGULAR: &[(&str, &str)] = &[
    ("won", "win"),
    ("was", "be"),
    ("had", "have"),
    ("built", "build"),
    ("went", "go"),
    ("took", "take"),
    ("made", "make"),
    ("began", "begin"),
    ("became", "become"),
    ("wrote", "write"),
    ("led", "lead"),
    ("held", "hold"),
    ("sold", "sell"),
    ("gave", "give"),
    ("lost", "lose"),
    ("left", "leave"),
    ("met", "meet"),
    ("ran", "run"),
    ("brought", "bring"),
    ("bought", "buy"),
    ("taught", "teach"),
    ("fought", "fight"),
    ("knew", "know"),
    ("grew", "grow"),
    ("chose", "choose"),
    ("spoke", "speak"),
];

const NOT_PAST: &[&str] = &[
    "red", "bed", "need", "seed", "feed", "speed", "hundred", "breed", "shed", "weed", "greed", "indeed", "proceed",
    "exceed", "succeed", "embed", "sled", "shred", "fled", "bred",
];

const DETERMINERS: &[&str] = &[
    "the", "a", "an", "its", "their", "his", "her", "this", "that", "our", "my",
];

fn is_vowel(c: char) -> bool {
    matches!(c, 'a' | 'e' | 'i' | 'o' | 'u')
}

/// Base form of a regular past-tense verb ("defeated" -> "defeat", "located" -> "locate").
pub fn regular_stem(word: &str) -> String {
    let w = word.to_lowercase();
    if w.ends_with("ied") && w.len() > 4 {
        return format!("{}y", &w[..w.len() - 3]);
    }
    let stem = &w[..w.len() - 2];
    let c: Vec<char> = stem.chars().collect();
    let n = c.len();
    if n >= 3 && c[n - 1] == c[n - 2] && !is_vowel(c[n - 1]) && !matches!(c[n - 1], 'l' | 's' | 'z' | 'f') {
        return c[..n - 1].iter().collect();
    }
    let ends = |s: &str| stem.ends_with(s);
    let cons_before = |k: usize| n > k && !is_vowel(c[n - k - 1]);
    let needs_e = matches!(c.last(), Some('c' | 'v' | 'z'))
        || ends("ir")
        || (ends("ur") && cons_before(2))
        || (ends("ar") && n >= 3 && c[n - 3] != 'e')
        || (ends("at") && cons_before(2))
        || (ends("in") && cons_before(2))
        || (n >= 2 && c[n - 1] == 'l' && matches!(c[n - 2], 'b' | 'd' | 'g' | 'k' | 'p' | 't' | 'c' | 'f'))
        || (n >= 2 && c[n - 1] == 's' && is_vowel(c[n - 2]))
        || ends("ang")
        || ends("rg")
        || ends("dg")
        || (n >= 3 && c[n - 1] == 'k' && matches!(c[n - 2], 'a' | 'i' | 'o' | 'u') && !is_vowel(c[n - 3]));
    if needs_e {
        format!("{stem}e")
    } else {
        stem.to_string()
    }
}

/// Verb found in a sentence: its character range and what to do with it.
#[derive(Debug, Clone, PartialEq, Eq)]
enum VerbShape {
    /// "is" -> "is not"
    Copula { end: usize },
    /// "won" -> "didn't win"
    Past { start: usize, end: usize, base: String },
}

/// First negatable verb in `sentence`, skipping its first word and anything inside `skip`.
fn find_verb(sentence: &str, skip: Option<(usize, usize)>) -> Option<VerbShape> {
    let ws = words(sentence);
    for (i, w) in ws.iter().enumerate().skip(1) {
        if skip.is_some_and(|(s, e)| w.start < e && s < w.end) {
            continue;
        }
        let lw = w.text.to_lowercase();
        if COPULAS.contains(&lw.as_str()) {
            return Some(VerbShape::Copula { end: w.end });
        }
        if let Some((_, base)) = IRREGULAR.iter().find(|(p, _)| *p == lw) {
            return Some(VerbShape::Past {
                start: w.start,
                end: w.end,
                base: base.to_string(),
            });
        }
        let after_det = DETERMINERS.contains(&ws[i - 1].text.to_lowercase().as_str());
        if lw.len() >= 5
            && lw.ends_with("ed")
            && lw.chars().all(|c| c.is_ascii_alphabetic())
            && !NOT_PAST.contains(&lw.as_str())
            && !after_det
            && w.text.chars().next().is_some_and(char::is_lowercase)
        {
            return Some(VerbShape::Past {
                start: w.start,
                end: w.end,
                base: regular_stem(&lw),
            });
        }
    }
    None
}

/// Negate one sentence: "not" after a copula, or "didn't <base>" for a past-tense verb.
pub fn negate_sentence(sentence: &str) -> Option<String> {
    negate_with_skip(sentence, None)
}

fn negate_with_skip(sentence: &str, skip: Option<(usize, usize)>) -> Option<String> {
    let idx = CharIndex::new(sentence);
    let (head, insert, tail) = match find_verb(sentence, skip)? {
        VerbShape::Copula { end } => (idx.slice(0, end)?, " not".to_string(), idx.slice(end, idx.len())?),
        VerbShape::Past { start, end, base } => (
            idx.slice(0, start)?,
            format!("didn't {base}"),
            idx.slice(end, idx.len())?,
        ),
    };
    Some(format!("{head}{insert}{tail}"))
}

/// Sentence range holding the first gold answer.
fn gold_sentence(example: &QAExample) -> Option<(usize, usize)> {
    let (gs, _, _) = gold_span(example)?;
    let spans = sentence_spans(&example.context);
    spans.get(sentence_index(&spans, gs)).copied()
}

/// Append "Some claim they didn't <verb>." (answer unchanged, weight 3.0).
///
/// Only negation-free examples are eligible.
pub fn gen_additive_negation_pair(example: &QAExample, seed: u64, templates: &Templates) -> Result<QAExample> {
    if example.has_negation_marker() {
        return Err(Error::IneligibleExample(example.id.clone()));
    }
    let mut rng = rng_for(seed);
    let base = gold_sentence(example).and_then(|(s, e)| {
        let sent = char_slice(&example.context, s, e)?;
        match find_verb(sent, None)? {
            VerbShape::Past { base, .. } if base != "be" => Some(base),
            _ => None,
        }
    });
    let sentence = match base {
        Some(b) => templates.pick(AttackType::AdditiveNegation, &mut rng).replace(VERB, &b),
        None => ADDITIVE_FALLBACK.to_string(),
    };
    let mut out = append_sentence(example, &sentence, AttackType::AdditiveNegation);
    out.is_negation = true;
    out.loss_weight = NEGATION_WEIGHT;
    Ok(out)
}

/// Negate the answer-bearing sentence, making the question unanswerable (weight 3.0).
pub fn gen_transformative_negation_pair(example: &QAExample, _seed: u64) -> Generated {
    let (gs, ge, _) = gold_span(example).ok_or(SkipReason::NoAnswer)?;
    let (ss, se) = gold_sentence(example).ok_or(SkipReason::UnsupportedVerbShape)?;
    let idx = CharIndex::new(&example.context);
    let sentence = idx.slice(ss, se).ok_or(SkipReason::UnsupportedVerbShape)?;
    let skip = (gs.saturating_sub(ss), ge.saturating_sub(ss));
    let negated = negate_with_skip(sentence, Some(skip)).ok_or(SkipReason::UnsupportedVerbShape)?;
    let delta = char_len(&negated) as isize - (se - ss) as isize;
    let mut out = example.clone();
    out.context = format!(
        "{}{}{}",
        idx.slice(0, ss).unwrap_or_default(),
        negated,
        idx.slice(se, idx.len()).unwrap_or_default()
    );
    let shift = |p: usize| (p as isize + delta) as usize;
    out.distractor_spans = example
        .distractor_spans
        .iter()
        .map(|&(s, e)| {
            if s >= se {
                (shift(s), shift(e))
            } else if e > ss {
                (s, shift(e))
            } else {
                (s, e)
            }
        })
        .collect();
    tag(&mut out, AttackType::TransformativeNegation);
    out.answers.clear();
    out.is_impossible = true;
    out.is_negation = true;
    out.loss_weight = NEGATION_WEIGHT;
    Ok(out)
}

/// Append a sentence asserting one of the mined hard negatives (weight 2.5).
pub fn gen_entity_substitution(
    example: &QAExample,
    seed: u64,
    hard_negatives: &HardNegativeSet,
    templates: &Templates,
) -> Generated {
    let mut rng = rng_for(seed);
    let neg = hard_negatives
        .negatives
        .choose(&mut rng)
        .ok_or(SkipReason::NoHardNegatives)?;
    let sentence = templates
        .pick(AttackType::EntitySubstitution, &mut rng)
        .replace(DISTRACTOR, &neg.surface);
    let mut out = append_sentence(example, &sentence, AttackType::EntitySubstitution);
    out.loss_weight = ENTITY_WEIGHT;
    out.is_entity_rich = true;
    Ok(out)
}

/// Run one attack type on one example.
pub fn generate(attack: AttackType, example: &QAExample, seed: u64, templates: &Templates) -> Generated {
    match attack {
        AttackType::Paraphrase => gen_paraphrase_attack(example, seed, templates),
        AttackType::EntitySwap => gen_entity_swap_attack(example, seed, templates),
        AttackType::NegationAttack => gen_negation_attack(example, seed, templates),
        AttackType::NumericAttack => gen_numeric_attack(example, seed, templates),
        AttackType::AdditiveNegation => {
            gen_additive_negation_pair(example, seed, templates).map_err(|_| SkipReason::HasNegation)
        }
        AttackType::TransformativeNegation => gen_transformative_negation_pair(example, seed),
        AttackType::EntitySubstitution => {
            let mut probe = example.clone();
            match mine_hard_negatives(&mut probe) {
                Some(set) => gen_entity_substitution(example, seed, &set, templates),
                None => Err(SkipReason::NoHardNegatives),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AugmentationReport {
    pub input_size: usize,
    pub eligible: usize,
    pub attempted: usize,
    pub generated: BTreeMap<String, usize>,
    pub skipped: BTreeMap<String, usize>,
    pub total_generated: usize,
    pub output_size: usize,
    /// Expected counts supplied by the configuration, for side-by-side comparison.
    pub reference_counts: BTreeMap<String, usize>,
    /// `generated - reference` per key present in `reference_counts`.
    pub reference_delta: BTreeMap<String, i64>,
}

fn sample_sorted(n: usize, k: usize, seed: u64, label: &str) -> Vec<usize> {
    let mut rng = rng_for(derive_seed(seed, label));
    let mut picked = index::sample(&mut rng, n, k.min(n)).into_vec();
    picked.sort_unstable();
    picked
}

/// Attack a seeded sample of the answerable examples and append the results.
///
/// Attack types rotate round-robin over the sample; when an example cannot take its
/// assigned type, the following types are tried in order before it is skipped.
pub fn run_augmentation(dataset: &Dataset, config: &AttackConfig) -> Result<(Dataset, AugmentationReport)> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    config.validate()?;
    let eligible: Vec<&QAExample> = dataset
        .examples
        .iter()
        .filter(|e| !e.is_impossible && !e.answers.is_empty())
        .collect();
    let k = round_count(config.augmentation_rate, eligible.len());
    let picked = sample_sorted(eligible.len(), k, config.seed, "augment");
    let m = config.attacks.len();

    let mut report = AugmentationReport {
        input_size: dataset.len(),
        eligible: eligible.len(),
        attempted: picked.len(),
        reference_counts: config.reference_counts.clone(),
        ..Default::default()
    };
    for a in &config.attacks {
        report.generated.insert(a.to_string(), 0);
    }
    let mut out = dataset.examples.clone();
    for (j, &i) in picked.iter().enumerate() {
        let ex = eligible[i];
        let seed = derive_seed(config.seed, &ex.id);
        let mut last_skip = SkipReason::NoAnswer;
        let mut done = false;
        for step in 0..m {
            let attack = config.attacks[(j + step) % m];
            match generate(attack, ex, seed, &config.templates) {
                Ok(g) => {
                    *report.generated.entry(attack.to_string()).or_default() += 1;
                    out.push(g);
                    done = true;
                    break;
                }
                Err(r) => last_skip = r,
            }
        }
        if !done {
            *report.skipped.entry(last_skip.to_string()).or_default() += 1;
        }
    }
    report.total_generated = report.generated.values().sum();
    report.output_size = out.len();
    for (key, &want) in &report.reference_counts {
        let got = if key == "total" {
            report.total_generated
        } else {
            report.generated.get(key).copied().unwrap_or(0)
        };
        report.reference_delta.insert(key.clone(), got as i64 - want as i64);
    }
    let mut ds = Dataset::new(out, format!("{}+augmented", dataset.source_label))?;
    ds.version = dataset.version.clone();
    Ok((ds, report))
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct NegationReport {
    pub input_size: usize,
    pub original_negation: usize,
    pub positives: usize,
    pub sampled: usize,
    pub additive: usize,
    pub transformative: usize,
    /// Sampled for transformative negation but fell back to additive.
    pub fallbacks: usize,
    pub output_size: usize,
    /// Output size as a percentage of the input.
    pub size_ratio: f64,
    pub weighted: usize,
    /// Share of output examples carrying the negation weight, in percent.
    pub weighted_share: f64,
}

/// Build the negation contrastive set.
///
/// Examples already containing a marker are flagged and weighted. A seeded share of the
/// negation-free answerable examples is sampled; samples alternate between additive and
/// transformative pairs. The source of every transformative pair is flagged and weighted
/// as well, since it is the positive half of that pair.
pub fn run_negation_pairs(dataset: &Dataset, config: &AttackConfig) -> Result<(Dataset, NegationReport)> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    config.validate()?;
    let mut originals = dataset.examples.clone();
    let mut report = NegationReport {
        input_size: originals.len(),
        ..Default::default()
    };
    let mut positives = Vec::new();
    for (i, ex) in originals.iter_mut().enumerate() {
        if ex.has_negation_marker() {
            ex.is_negation = true;
            ex.loss_weight = NEGATION_WEIGHT;
            report.original_negation += 1;
        } else if !ex.is_impossible && !ex.answers.is_empty() {
            positives.push(i);
        }
    }
    report.positives = positives.len();
    let k = round_count(config.negation_rate, positives.len());
    let picked = sample_sorted(positives.len(), k, config.seed, "negation-pairs");
    report.sampled = picked.len();

    let mut generated = Vec::with_capacity(picked.len());
    for (j, &p) in picked.iter().enumerate() {
        let i = positives[p];
        let seed = derive_seed(config.seed, &originals[i].id);
        if j % 2 == 1 {
            if let Ok(t) = gen_transformative_negation_pair(&originals[i], seed) {
                originals[i].is_negation = true;
                originals[i].loss_weight = NEGATION_WEIGHT;
                generated.push(t);
                report.transformative += 1;
                continue;
            }
            report.fallbacks += 1;
        }
        generated.push(gen_additive_negation_pair(&originals[i], seed, &config.templates)?);
        report.additive += 1;
    }
    originals.extend(generated);
    report.output_size = originals.len();
    report.size_ratio = 100.0 * report.output_size as f64 / report.input_size as f64;
    report.weighted = originals.iter().filter(|e| e.loss_weight == NEGATION_WEIGHT).count();
    report.weighted_share = 100.0 * report.weighted as f64 / report.output_size as f64;
    let mut ds = Dataset::new(originals, format!("{}+negation", dataset.source_label))?;
    ds.version = dataset.version.clone();
    Ok((ds, report))
}

/// Mine hard negatives for every example, then add entity substitutions for a seeded
/// share of the entity-rich ones.
pub fn run_entity_substitution(
    dataset: &Dataset,
    config: &AttackConfig,
) -> Result<(Dataset, Vec<HardNegativeSet>, AugmentationReport)> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    config.validate()?;
    let mut originals = dataset.examples.clone();
    let mut sets = Vec::new();
    let mut rich = Vec::new();
    for (i, ex) in originals.iter_mut().enumerate() {
        if let Some(set) = mine_hard_negatives(ex) {
            if !set.negatives.is_empty() {
                rich.push((i, sets.len()));
            }
            sets.push(set);
        }
    }
    let k = round_count(config.entity_rate, rich.len());
    let picked = sample_sorted(rich.len(), k, config.seed, "entity-substitution");
    let mut report = AugmentationReport {
        input_size: originals.len(),
        eligible: rich.len(),
        attempted: picked.len(),
        ..Default::default()
    };
    let mut generated = Vec::new();
    for &p in &picked {
        let (i, s) = rich[p];
        let seed = derive_seed(config.seed, &originals[i].id);
        match gen_entity_substitution(&originals[i], seed, &sets[s], &config.templates) {
            Ok(g) => generated.push(g),
            Err(r) => *report.skipped.entry(r.to_string()).or_default() += 1,
        }
    }
    report
        .generated
        .insert(AttackType::EntitySubstitution.to_string(), generated.len());
    report.total_generated = generated.len();
    originals.extend(generated);
    report.output_size = originals.len();
    let mut ds = Dataset::new(originals, format!("{}+entity", dataset.source_label))?;
    ds.version = dataset.version.clone();
    Ok((ds, sets, report))
}
