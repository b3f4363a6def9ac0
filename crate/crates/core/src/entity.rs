//! Rule-based entity extraction, same-type hard-negative mining and
//! character-to-token offset mapping.
//!
//! The extractor is a deterministic cascade over word tokens: numeric and
//! temporal shapes first, then capitalised sequences typed by gazetteer cues.
//! At each position every rule proposes a match; the longest wins and ties go to
//! the earlier rule. Matches never overlap and come out sorted.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::corpus::QAExample;
use crate::error::{Error, Result};
use crate::gazetteer as gz;
use crate::metrics::normalize_answer;
use crate::text::{char_len, words, CharIndex, Word};

/// Most negatives kept per example.
pub const MAX_NEGATIVES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EntityType {
    Person,
    Location,
    Date,
    Number,
    Organization,
    Year,
    Time,
    Money,
    Percent,
    Ordinal,
    Event,
    Facility,
    Misc,
}

impl EntityType {
    pub const ALL: [EntityType; 13] = [
        EntityType::Person,
        EntityType::Location,
        EntityType::Date,
        EntityType::Number,
        EntityType::Organization,
        EntityType::Year,
        EntityType::Time,
        EntityType::Money,
        EntityType::Percent,
        EntityType::Ordinal,
        EntityType::Event,
        EntityType::Facility,
        EntityType::Misc,
    ];

    /// Types produced by the capitalised-sequence rule, as opposed to value shapes.
    pub fn is_named(self) -> bool {
        matches!(
            self,
            EntityType::Person
                | EntityType::Location
                | EntityType::Organization
                | EntityType::Event
                | EntityType::Facility
                | EntityType::Misc
        )
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntitySpan {
    pub surface: String,
    pub char_start: usize,
    pub char_end: usize,
    pub entity_type: EntityType,
    #[serde(default)]
    pub token_start: Option<usize>,
    #[serde(default)]
    pub token_end: Option<usize>,
}

impl EntitySpan {
    pub fn overlaps(&self, start: usize, end: usize) -> bool {
        self.char_start < end && start < self.char_end
    }

    /// Character gap to `[start, end)`; zero when overlapping.
    pub fn distance_to(&self, start: usize, end: usize) -> usize {
        if self.char_end <= start {
            start - self.char_end
        } else {
            self.char_start.saturating_sub(end)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardNegativeSet {
    pub example_id: String,
    pub answer_span: EntitySpan,
    pub negatives: Vec<EntitySpan>,
}

impl HardNegativeSet {
    /// Type equality, surface distinctness, no overlap with the answer, at most five.
    pub fn check(&self) -> std::result::Result<(), String> {
        if self.negatives.len() > MAX_NEGATIVES {
            return Err(format!("{} negatives", self.negatives.len()));
        }
        let gold = normalize_answer(&self.answer_span.surface);
        for n in &self.negatives {
            if n.entity_type != self.answer_span.entity_type {
                return Err(format!("negative {:?} has type {}", n.surface, n.entity_type));
            }
            if normalize_answer(&n.surface) == gold {
                return Err(format!("negative {:?} repeats the answer", n.surface));
            }
            if n.overlaps(self.answer_span.char_start, self.answer_span.char_end) {
                return Err(format!("negative {:?} overlaps the answer", n.surface));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TokenizationWithOffsets {
    pub tokens: Vec<String>,
    /// Character ranges `[start, end)`, one per token.
    pub offsets: Vec<(usize, usize)>,
}

impl TokenizationWithOffsets {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

/// Alphanumeric runs become tokens; every other non-space character is a token by itself.
pub fn tokenize_with_offsets(text: &str) -> TokenizationWithOffsets {
    let mut out = TokenizationWithOffsets::default();
    let mut cur = String::new();
    let mut cur_start = 0;
    for (i, c) in text.chars().enumerate() {
        if c.is_alphanumeric() {
            if cur.is_empty() {
                cur_start = i;
            }
            cur.push(c);
            continue;
        }
        if !cur.is_empty() {
            out.offsets.push((cur_start, i));
            out.tokens.push(std::mem::take(&mut cur));
        }
        if !c.is_whitespace() {
            out.tokens.push(c.to_string());
            out.offsets.push((i, i + 1));
        }
    }
    if !cur.is_empty() {
        let end = cur_start + cur.chars().count();
        out.offsets.push((cur_start, end));
        out.tokens.push(cur);
    }
    out
}

/// Smallest inclusive token interval intersecting the character span `[start, end)`.
pub fn map_to_token_positions(span: (usize, usize), tokenization: &TokenizationWithOffsets) -> Result<(usize, usize)> {
    let (start, end) = span;
    let offs = &tokenization.offsets;
    let first = offs.partition_point(|&(_, e)| e <= start);
    let past_last = offs.partition_point(|&(s, _)| s < end);
    if start >= end || first >= past_last {
        return Err(Error::UnmappableSpan { start, end });
    }
    Ok((first, past_last - 1))
}

struct Scanner<'a> {
    chars: Vec<char>,
    words: Vec<Word<'a>>,
    lower: Vec<String>,
}

#[derive(Clone, Copy)]
struct Candidate {
    start: usize,
    end: usize,
    kind: EntityType,
}

impl<'a> Scanner<'a> {
    fn new(text: &'a str) -> Self {
        let words = words(text);
        let lower = words.iter().map(|w| w.text.to_lowercase()).collect();
        Scanner {
            chars: text.chars().collect(),
            words,
            lower,
        }
    }

    fn is_digits(&self, i: usize) -> bool {
        self.words[i].text.chars().all(|c| c.is_ascii_digit())
    }

    fn is_capitalized(&self, i: usize) -> bool {
        self.words[i].text.chars().next().is_some_and(char::is_uppercase)
    }

    /// Characters strictly between word `i` and word `i + 1`.
    fn gap(&self, i: usize) -> &[char] {
        &self.chars[self.words[i].end..self.words[i + 1].start]
    }

    fn gap_is_space(&self, i: usize) -> bool {
        let g = self.gap(i);
        !g.is_empty() && g.iter().all(|c| *c == ' ')
    }

    fn char_after(&self, i: usize) -> Option<char> {
        self.chars.get(self.words[i].end).copied()
    }

    /// Digit words joined by single `,` or `.` ("1,200", "3.5"). Returns the last word index.
    fn number_run(&self, i: usize) -> Option<usize> {
        if !self.is_digits(i) {
            return None;
        }
        let mut j = i;
        while j + 1 < self.words.len() && self.is_digits(j + 1) {
            let g = self.gap(j);
            if g.len() == 1 && (g[0] == ',' || g[0] == '.') {
                j += 1;
            } else {
                break;
            }
        }
        Some(j)
    }

    fn next_is(&self, j: usize, set: &[&str]) -> bool {
        j + 1 < self.words.len() && self.gap_is_space(j) && set.contains(&self.lower[j + 1].as_str())
    }

    fn month_at(&self, i: usize) -> bool {
        self.is_capitalized(i) && gz::MONTHS.contains(&self.lower[i].as_str())
    }

    fn day_number(&self, i: usize) -> bool {
        self.is_digits(i)
            && self.words[i].text.len() <= 2
            && self.words[i].text.parse::<u32>().is_ok_and(|d| (1..=31).contains(&d))
    }

    fn year_number(&self, i: usize) -> bool {
        self.is_digits(i)
            && self.words[i].text.len() == 4
            && self.words[i]
                .text
                .parse::<u32>()
                .is_ok_and(|y| (1000..=2999).contains(&y))
    }

    fn cand(&self, i: usize, j: usize, kind: EntityType) -> Candidate {
        Candidate {
            start: self.words[i].start,
            end: self.words[j].end,
            kind,
        }
    }

    fn money(&self, i: usize) -> Option<Candidate> {
        let run = self.number_run(i)?;
        let sign_before = self.words[i].start > 0 && matches!(self.chars[self.words[i].start - 1], '$' | '€' | '£');
        let mut j = run;
        if self.next_is(j, gz::MAGNITUDES) {
            j += 1;
        }
        if sign_before {
            let mut c = self.cand(i, j, EntityType::Money);
            c.start -= 1;
            return Some(c);
        }
        if self.next_is(j, gz::CURRENCY_WORDS) {
            return Some(self.cand(i, j + 1, EntityType::Money));
        }
        None
    }

    fn percent(&self, i: usize) -> Option<Candidate> {
        let run = self.number_run(i)?;
        if self.char_after(run) == Some('%') {
            let mut c = self.cand(i, run, EntityType::Percent);
            c.end += 1;
            return Some(c);
        }
        if self.next_is(run, &["percent", "per cent"]) {
            return Some(self.cand(i, run + 1, EntityType::Percent));
        }
        None
    }

    fn time(&self, i: usize) -> Option<Candidate> {
        let w = &self.lower[i];
        if (w.ends_with("am") || w.ends_with("pm"))
            && w.len() > 2
            && w[..w.len() - 2].chars().all(|c| c.is_ascii_digit())
        {
            return Some(self.cand(i, i, EntityType::Time));
        }
        if !self.is_digits(i) || self.words[i].text.len() > 2 {
            return None;
        }
        let mut j = i;
        if i + 1 < self.words.len()
            && self.gap(i) == [':']
            && self.is_digits(i + 1)
            && self.words[i + 1].text.len() == 2
        {
            j = i + 1;
        }
        if self.next_is(j, &["am", "pm"]) {
            return Some(self.cand(i, j + 1, EntityType::Time));
        }
        (j > i).then(|| self.cand(i, j, EntityType::Time))
    }

    fn date(&self, i: usize) -> Option<Candidate> {
        let n = self.words.len();
        // D/M/Y or D-M-Y
        if self.is_digits(i) && i + 2 < n && self.is_digits(i + 1) && self.is_digits(i + 2) {
            let (g1, g2) = (self.gap(i), self.gap(i + 1));
            if g1.len() == 1 && g1 == g2 && matches!(g1[0], '/' | '-') {
                return Some(self.cand(i, i + 2, EntityType::Date));
            }
        }
        // 4 July 1776
        if self.day_number(i) && i + 1 < n && self.gap_is_space(i) && self.month_at(i + 1) {
            let mut j = i + 1;
            if j + 1 < n && self.gap_is_space(j) && self.year_number(j + 1) {
                j += 1;
            }
            return Some(self.cand(i, j, EntityType::Date));
        }
        // July 4, 1776 / July 1776 / July
        if self.month_at(i) {
            let mut j = i;
            if j + 1 < n && self.gap_is_space(j) && self.day_number(j + 1) {
                j += 1;
                if j + 1 < n && self.year_number(j + 1) {
                    let g = self.gap(j);
                    if g == [',', ' '] || g == [' '] {
                        j += 1;
                    }
                }
            } else if j + 1 < n && self.gap_is_space(j) && self.year_number(j + 1) {
                j += 1;
            }
            return Some(self.cand(i, j, EntityType::Date));
        }
        None
    }

    fn year(&self, i: usize) -> Option<Candidate> {
        if !self.year_number(i) || self.number_run(i) != Some(i) {
            return None;
        }
        if matches!(self.char_after(i), Some('%' | ':')) {
            return None;
        }
        Some(self.cand(i, i, EntityType::Year))
    }

    fn ordinal(&self, i: usize) -> Option<Candidate> {
        let w = &self.lower[i];
        let digit_ordinal = ["st", "nd", "rd", "th"]
            .iter()
            .any(|s| w.len() > 2 && w.ends_with(s) && w[..w.len() - 2].chars().all(|c| c.is_ascii_digit()));
        (digit_ordinal || gz::ORDINAL_WORDS.contains(&w.as_str())).then(|| self.cand(i, i, EntityType::Ordinal))
    }

    fn number(&self, i: usize) -> Option<Candidate> {
        let mut j = if let Some(run) = self.number_run(i) {
            run
        } else if gz::SPELLED_NUMBERS.contains(&self.lower[i].as_str()) {
            i
        } else {
            return None;
        };
        if self.next_is(j, gz::MAGNITUDES) {
            j += 1;
        }
        Some(self.cand(i, j, EntityType::Number))
    }

    fn named(&self, i: usize) -> Option<Candidate> {
        let n = self.words.len();
        if !self.is_capitalized(i) || gz::CAPITALIZED_STOPWORDS.contains(&self.lower[i].as_str()) || self.month_at(i) {
            return None;
        }
        let mut j = i;
        loop {
            if j + 1 >= n || !self.gap_is_space(j) {
                break;
            }
            if self.is_capitalized(j + 1) && !gz::CAPITALIZED_STOPWORDS.contains(&self.lower[j + 1].as_str()) {
                j += 1;
                continue;
            }
            // "University of Texas", "Rio de Janeiro"
            if matches!(self.lower[j + 1].as_str(), "of" | "de" | "du" | "von" | "van")
                && j + 2 < n
                && self.gap_is_space(j + 1)
                && self.is_capitalized(j + 2)
                && !gz::CAPITALIZED_STOPWORDS.contains(&self.lower[j + 2].as_str())
            {
                j += 2;
                continue;
            }
            break;
        }
        let kind = self.classify_named(i, j);
        if kind == EntityType::Event && j + 1 < n && self.gap_is_space(j) && self.is_digits(j + 1) {
            j += 1;
        }
        Some(self.cand(i, j, kind))
    }

    fn classify_named(&self, i: usize, j: usize) -> EntityType {
        let toks: Vec<&str> = (i..=j)
            .map(|k| self.lower[k].trim_end_matches("'s").trim_end_matches("\u{2019}s"))
            .collect();
        let last = *toks.last().unwrap_or(&"");
        let phrase = toks.join(" ");
        if gz::ORGANIZATION_CUES.contains(&last) || (toks.len() > 1 && toks[0] == "university") {
            return EntityType::Organization;
        }
        if gz::FACILITY_CUES.contains(&last) {
            return EntityType::Facility;
        }
        if toks.iter().any(|t| gz::EVENT_CUES.contains(t)) && toks.len() > 1 || toks == ["olympics"] {
            return EntityType::Event;
        }
        if gz::HONORIFICS.contains(&toks[0]) || gz::GIVEN_NAMES.contains(&toks[0]) {
            return EntityType::Person;
        }
        if gz::is_place(&phrase) || (toks.len() == 1 && gz::has_place_suffix(&phrase)) {
            return EntityType::Location;
        }
        // A known place followed by more words: "Denver Broncos", "Texas Instruments".
        if toks.len() > 1 && (1..toks.len()).any(|k| gz::is_place(&toks[..k].join(" "))) {
            return EntityType::Organization;
        }
        EntityType::Misc
    }

    fn candidates(&self, i: usize) -> Vec<Candidate> {
        [
            self.money(i),
            self.percent(i),
            self.time(i),
            self.date(i),
            self.year(i),
            self.ordinal(i),
            self.number(i),
            self.named(i),
        ]
        .into_iter()
        .flatten()
        .collect()
    }
}

/// Extract entity spans from `text`, sorted and non-overlapping.
pub fn extract_entities(text: &str) -> Vec<EntitySpan> {
    let sc = Scanner::new(text);
    let idx = CharIndex::new(text);
    let mut out = Vec::new();
    let mut i = 0;
    while i < sc.words.len() {
        let best = sc
            .candidates(i)
            .into_iter()
            .reduce(|best, c| if c.end > best.end { c } else { best });
        match best {
            Some(c) => {
                out.push(EntitySpan {
                    surface: idx.slice(c.start, c.end).unwrap_or_default().to_string(),
                    char_start: c.start,
                    char_end: c.end,
                    entity_type: c.kind,
                    token_start: None,
                    token_end: None,
                });
                while i < sc.words.len() && sc.words[i].start < c.end {
                    i += 1;
                }
            }
            None => i += 1,
        }
    }
    out
}

/// Type of `text` when the whole string (ignoring articles and punctuation) is one entity.
pub fn entity_type_of(text: &str) -> Option<EntityType> {
    let ents = extract_entities(text);
    let [e] = ents.as_slice() else {
        return None;
    };
    let idx = CharIndex::new(text);
    let before = idx.slice(0, e.char_start).unwrap_or_default();
    let after = idx.slice(e.char_end, idx.len()).unwrap_or_default();
    (normalize_answer(before).is_empty() && normalize_answer(after).is_empty()).then_some(e.entity_type)
}

fn surface_key(s: &str) -> String {
    normalize_answer(s).join(" ")
}

/// Same-type, surface-distinct entities around the gold answer, nearest first, at most five.
///
/// Returns `None` when the example has no answer or the answer is not recognised as an
/// entity. Sets `is_entity_rich` on the example to whether any negative was found.
pub fn mine_hard_negatives(example: &mut QAExample) -> Option<HardNegativeSet> {
    example.is_entity_rich = false;
    let gold = example.answers.first()?;
    let (gs, ge) = (gold.answer_start, gold.answer_start + char_len(&gold.text));
    let entities = extract_entities(&example.context);
    let gold_type = entities
        .iter()
        .find(|e| e.char_start == gs && e.char_end == ge)
        .map(|e| e.entity_type)
        .or_else(|| entity_type_of(&gold.text))?;
    let gold_key = surface_key(&gold.text);
    let tokens = tokenize_with_offsets(&example.context);

    let mut pool: Vec<&EntitySpan> = entities
        .iter()
        .filter(|e| e.entity_type == gold_type && !e.overlaps(gs, ge) && surface_key(&e.surface) != gold_key)
        .collect();
    pool.sort_by_key(|e| (e.distance_to(gs, ge), e.char_start));
    let mut negatives: Vec<EntitySpan> = Vec::new();
    for e in pool {
        if negatives.len() == MAX_NEGATIVES {
            break;
        }
        let key = surface_key(&e.surface);
        if negatives.iter().any(|n| surface_key(&n.surface) == key) {
            continue;
        }
        let mut n = e.clone();
        if let Ok((ts, te)) = map_to_token_positions((n.char_start, n.char_end), &tokens) {
            n.token_start = Some(ts);
            n.token_end = Some(te);
        }
        negatives.push(n);
    }
    let (ts, te) = map_to_token_positions((gs, ge), &tokens).ok().unzip();
    let answer_span = EntitySpan {
        surface: gold.text.clone(),
        char_start: gs,
        char_end: ge,
        entity_type: gold_type,
        token_start: ts,
        token_end: te,
    };
    example.is_entity_rich = !negatives.is_empty();
    Some(HardNegativeSet {
        example_id: example.id.clone(),
        answer_span,
        negatives,
    })
}

/// Corpus-level statistics for mined negatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativeStats {
    pub examples: usize,
    pub entity_answers: usize,
    pub entity_rich: usize,
    pub entity_rich_fraction: f64,
    pub mean_negatives: f64,
    /// Answer entity type counts over entity-rich examples.
    pub type_distribution: BTreeMap<EntityType, usize>,
}

pub fn negative_stats(total_examples: usize, sets: &[HardNegativeSet]) -> NegativeStats {
    let rich: Vec<&HardNegativeSet> = sets.iter().filter(|s| !s.negatives.is_empty()).collect();
    let mut type_distribution = BTreeMap::new();
    for s in &rich {
        *type_distribution.entry(s.answer_span.entity_type).or_insert(0) += 1;
    }
    let neg_total: usize = rich.iter().map(|s| s.negatives.len()).sum();
    NegativeStats {
        examples: total_examples,
        entity_answers: sets.len(),
        entity_rich: rich.len(),
        entity_rich_fraction: if total_examples == 0 {
            0.0
        } else {
            rich.len() as f64 / total_examples as f64
        },
        mean_negatives: if rich.is_empty() {
            0.0
        } else {
            neg_total as f64 / rich.len() as f64
        },
        type_distribution,
    }
}
