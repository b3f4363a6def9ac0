//! Rule-based error taxonomy: five categorization schemes over a failed prediction.
//!
//! Each single-label classifier is an ordered rule list where the first match wins,
//! so every input receives exactly one label. Pattern detection is multi-label and
//! each detector runs independently.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Dataset, PredictionSet, QAExample};
use crate::entity::{entity_type_of, extract_entities};
use crate::error::{Error, Result};
use crate::gazetteer as gz;
use crate::metrics::{exact_match, normalize_answer};
use crate::text::{
    char_len, char_slice, is_negation_word, lower_words, numeric_values, sentence_index, sentence_spans,
};

macro_rules! label_enum {
    ($name:ident { $($variant:ident => $label:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn label(self) -> &'static str {
                match self { $($name::$variant => $label),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }
    };
}

label_enum!(QuestionType {
    What => "What",
    Who => "Who",
    Where => "Where",
    When => "When",
    Number => "Number",
    WhyHow => "Why/How",
    Other => "Other",
});

impl QuestionType {
    /// The six-row table layout, which has no separate "When" row.
    pub fn table_label(self) -> QuestionType {
        match self {
            QuestionType::When => QuestionType::Other,
            q => q,
        }
    }
}

label_enum!(AnswerType {
    Score => "Score",
    Venue => "Venue",
    Location => "Location",
    Date => "Date",
    LongPhrase => "Long_Phrase",
    ShortPhrase => "Short_Phrase",
    Year => "Year",
});

label_enum!(Complexity {
    Simple => "Simple",
    MultiPart => "Multi_Part",
    Complex => "Complex",
    Superlative => "Superlative",
    Counting => "Counting",
    Comparison => "Comparison",
    Causal => "Causal",
});

label_enum!(ErrorType {
    WrongPhrase => "Wrong_Phrase",
    Partial => "Partial",
    DistantDistractor => "Distant_Distractor",
    NearDistractor => "Near_Distractor",
    WrongYear => "Wrong_Year",
    Other => "Other",
});

label_enum!(Pattern {
    Negation => "Negation",
    EntitySubstitution => "Entity_Substitution",
    Numeric => "Numeric",
    Additive => "Additive",
    Paraphrase => "Paraphrase",
    Modal => "Modal",
    ComparativeSuperlative => "Comparative/Superlative",
    Temporal => "Temporal",
    ListEnumeration => "List_Enumeration",
    Coreference => "Coreference",
});

const WH_WORDS: &[&str] = &["what", "which", "who", "whom", "whose", "where", "when", "why", "how"];

const STOPWORDS: &[&str] = &[
    "a", "an", "the", "of", "in", "on", "at", "to", "for", "by", "with", "from", "and", "or", "but", "is", "was",
    "are", "were", "be", "been", "it", "its", "that", "this", "as", "did", "do", "does", "some", "not", "they", "he",
    "she", "his", "her", "their", "had", "has", "have",
];

const MODALS: &[&str] = &["may", "might", "could", "would", "should", "can", "must"];

const ADDITIVE_OPENERS: &[&[&str]] = &[
    &["however"],
    &["some", "claim"],
    &["some", "sources"],
    &["contrary", "to"],
];

const TEMPORAL_CUES: &[&str] = &[
    "before",
    "after",
    "during",
    "until",
    "since",
    "earlier",
    "later",
    "previously",
    "subsequently",
    "meanwhile",
    "following",
    "prior",
    "then",
    "later",
    "afterwards",
    "formerly",
];

const LIST_CUES: &[&[&str]] = &[
    &["such", "as"],
    &["including"],
    &["respectively"],
    &["namely"],
    &["as", "well", "as"],
];

const PRONOUNS: &[&str] = &["he", "she", "it", "they", "him", "her", "them", "his", "its", "their"];

const CLAUSE_LINKS: &[&str] = &[
    "and", "but", "or", "that", "which", "while", "although", "because", "if", "since", "whose", "whom", "after",
    "before", "until", "though",
];

const NOT_SUPERLATIVE: &[&str] = &[
    "interest",
    "west",
    "test",
    "request",
    "forest",
    "rest",
    "guest",
    "protest",
    "harvest",
    "contest",
    "honest",
    "modest",
    "suggest",
    "invest",
    "arrest",
    "nest",
    "quest",
    "chest",
    "vest",
    "pest",
    "midwest",
    "northwest",
    "southwest",
    "digest",
    "manifest",
    "conquest",
    "inquest",
    "priest",
    "earnest",
    "everest",
    "budapest",
    "bucharest",
    "unrest",
    "attest",
    "detest",
    "infest",
    "ingest",
    "crest",
    "zest",
    "behest",
    "celest",
    "interest",
    "lest",
];

fn has_phrase(words: &[String], phrase: &[&str]) -> bool {
    words
        .windows(phrase.len())
        .any(|w| w.iter().zip(phrase).all(|(a, b)| a == b))
}

fn is_superlative_word(w: &str) -> bool {
    matches!(w, "most" | "least" | "first" | "last" | "best" | "worst")
        || (w.len() > 4
            && w.ends_with("est")
            && w.chars().all(|c| c.is_ascii_alphabetic())
            && !NOT_SUPERLATIVE.contains(&w))
}

fn has_comparative(words: &[String]) -> bool {
    if words.iter().any(|w| matches!(w.as_str(), "versus" | "vs" | "compared")) {
        return true;
    }
    words.windows(2).any(|p| {
        p[1] == "than"
            && (matches!(p[0].as_str(), "more" | "less" | "fewer" | "rather" | "other")
                || (p[0].len() > 3 && p[0].ends_with("er")))
    })
}

/// Question type by the first wh-word, with "how many" / "how much" taking precedence.
///
/// "which" counts as What; "why" and "how" share one label.
pub fn classify_question_type(question: &str) -> QuestionType {
    let w = lower_words(question);
    if has_phrase(&w, &["how", "many"]) || has_phrase(&w, &["how", "much"]) {
        return QuestionType::Number;
    }
    for t in &w {
        let q = match t.as_str() {
            "what" | "which" => QuestionType::What,
            "who" | "whom" | "whose" => QuestionType::Who,
            "where" => QuestionType::Where,
            "when" => QuestionType::When,
            "why" | "how" => QuestionType::WhyHow,
            _ => continue,
        };
        return q;
    }
    QuestionType::Other
}

fn is_score(s: &str) -> bool {
    let parts: Vec<&str> = s.split(['-', '\u{2013}', '\u{2014}']).map(str::trim).collect();
    parts.len() == 2
        && parts
            .iter()
            .all(|p| (1..=3).contains(&p.len()) && p.chars().all(|c| c.is_ascii_digit()))
}

fn is_year(s: &str) -> bool {
    let t = normalize_answer(s);
    t.len() == 1 && t[0].len() == 4 && t[0].parse::<u32>().is_ok_and(|y| (1000..=2999).contains(&y))
}

fn is_date_shape(s: &str) -> bool {
    let t = s.trim();
    let parts: Vec<&str> = t.split(['/', '-']).collect();
    parts.len() == 3
        && parts
            .iter()
            .all(|p| !p.is_empty() && p.len() <= 4 && p.chars().all(|c| c.is_ascii_digit()))
}

/// Expected-answer type of a gold string. Rule order: Score, Year, Date, Venue,
/// Location, Long_Phrase (more than five normalized tokens), Short_Phrase.
pub fn classify_answer_type(gold: &str) -> AnswerType {
    if is_score(gold.trim()) {
        return AnswerType::Score;
    }
    if is_year(gold) {
        return AnswerType::Year;
    }
    let words = lower_words(gold);
    let raw = crate::text::words(gold);
    let month = raw.iter().any(|w| {
        w.text.chars().next().is_some_and(char::is_uppercase) && gz::MONTHS.contains(&w.text.to_lowercase().as_str())
    });
    if month || is_date_shape(gold) {
        return AnswerType::Date;
    }
    if words.iter().any(|w| gz::VENUE_CUES.contains(&w.as_str())) {
        return AnswerType::Venue;
    }
    let place = gold.split(',').all(|part| {
        let mut toks = normalize_answer(part);
        if toks.first().is_some_and(|t| matches!(t.as_str(), "in" | "at" | "near")) {
            toks.remove(0);
        }
        let phrase = toks.join(" ");
        !phrase.is_empty() && (gz::is_place(&phrase) || (toks.len() == 1 && gz::has_place_suffix(&phrase)))
    });
    if place {
        return AnswerType::Location;
    }
    if normalize_answer(gold).len() > 5 {
        return AnswerType::LongPhrase;
    }
    AnswerType::ShortPhrase
}

/// Reasoning complexity. Rule order: Causal, Counting, Comparison, Superlative,
/// Multi_Part, Simple (at most eight words and a single clause), Complex.
pub fn classify_complexity(question: &str) -> Complexity {
    let w = lower_words(question);
    let causal = w.iter().any(|t| matches!(t.as_str(), "why" | "reason" | "reasons"))
        || w.iter().position(|t| t == "how").is_some_and(|p| {
            w[p..]
                .iter()
                .any(|t| matches!(t.as_str(), "cause" | "caused" | "causes" | "lead" | "led"))
        });
    if causal {
        return Complexity::Causal;
    }
    if has_phrase(&w, &["how", "many"]) || has_phrase(&w, &["how", "much"]) {
        return Complexity::Counting;
    }
    if has_comparative(&w) {
        return Complexity::Comparison;
    }
    if w.iter().any(|t| is_superlative_word(t)) {
        return Complexity::Superlative;
    }
    if w.iter().filter(|t| WH_WORDS.contains(&t.as_str())).count() >= 2 {
        return Complexity::MultiPart;
    }
    // the interrogative itself ("in which year") is not a clause link
    let after_wh = w
        .iter()
        .position(|t| WH_WORDS.contains(&t.as_str()))
        .map_or(1, |p| p + 1);
    let single_clause =
        !question.contains([',', ';']) && !w.iter().skip(after_wh).any(|t| CLAUSE_LINKS.contains(&t.as_str()));
    if w.len() <= 8 && single_clause {
        return Complexity::Simple;
    }
    Complexity::Complex
}

/// Character span of the prediction inside the context, preferring an occurrence
/// inside a distractor span, then the first exact occurrence, then the first
/// case-insensitive one.
pub fn locate_prediction(example: &QAExample, prediction: &str) -> Option<(usize, usize)> {
    let pred = prediction.trim();
    if pred.is_empty() {
        return None;
    }
    let len = char_len(pred);
    let find_all = |hay: &str, needle: &str| -> Vec<usize> {
        hay.match_indices(needle).map(|(b, _)| char_len(&hay[..b])).collect()
    };
    let mut hits = find_all(&example.context, pred);
    if hits.is_empty() {
        let lower_ctx = example.context.to_lowercase();
        // lowercasing can change lengths for a few scripts; only trust it when it does not
        if char_len(&lower_ctx) == char_len(&example.context) {
            hits = find_all(&lower_ctx, &pred.to_lowercase());
        }
    }
    let in_distractor = |s: usize| {
        example
            .distractor_spans
            .iter()
            .any(|&(ds, de)| s >= ds && s + len <= de)
    };
    hits.iter()
        .copied()
        .find(|&s| in_distractor(s))
        .or_else(|| hits.first().copied())
        .map(|s| (s, s + len))
}

/// Non-fatal note from error-type classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TaxonomyWarning {
    /// No distractor spans were recorded, so the distractor labels cannot fire.
    RequiresDistractorSpans,
}

fn is_proper_subslice(short: &[String], long: &[String]) -> bool {
    !short.is_empty() && short.len() < long.len() && long.windows(short.len()).any(|w| w == short)
}

/// How the prediction went wrong. Rule order: Partial, Near/Distant_Distractor,
/// Wrong_Year, Wrong_Phrase (same answer type as gold), Other.
pub fn classify_error_type(example: &QAExample, prediction: &str) -> (ErrorType, Option<TaxonomyWarning>) {
    let warning = example
        .distractor_spans
        .is_empty()
        .then_some(TaxonomyWarning::RequiresDistractorSpans);
    let pred = normalize_answer(prediction);
    let golds: Vec<Vec<String>> = example.answers.iter().map(|a| normalize_answer(&a.text)).collect();
    if golds
        .iter()
        .any(|g| is_proper_subslice(&pred, g) || is_proper_subslice(g, &pred))
    {
        return (ErrorType::Partial, warning);
    }
    if let Some((ps, pe)) = locate_prediction(example, prediction) {
        let inside = example.distractor_spans.iter().any(|&(ds, de)| ps >= ds && pe <= de);
        if inside {
            let spans = sentence_spans(&example.context);
            let pred_sent = sentence_index(&spans, ps);
            let gold_sent = example
                .answers
                .first()
                .map_or(0, |a| sentence_index(&spans, a.answer_start));
            let label = if pred_sent.abs_diff(gold_sent) <= 1 {
                ErrorType::NearDistractor
            } else {
                ErrorType::DistantDistractor
            };
            return (label, warning);
        }
    }
    let pred_type = classify_answer_type(prediction);
    let gold_types: Vec<AnswerType> = example.answers.iter().map(|a| classify_answer_type(&a.text)).collect();
    if pred_type == AnswerType::Year && gold_types.contains(&AnswerType::Year) {
        return (ErrorType::WrongYear, warning);
    }
    if !pred.is_empty() && gold_types.contains(&pred_type) {
        return (ErrorType::WrongPhrase, warning);
    }
    (ErrorType::Other, warning)
}

fn content_words(text: &str) -> BTreeSet<String> {
    lower_words(text)
        .into_iter()
        .filter(|w| !STOPWORDS.contains(&w.as_str()) && !is_negation_word(w))
        .collect()
}

fn jaccard(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    let union = a.union(b).count();
    if union == 0 {
        return 0.0;
    }
    a.intersection(b).count() as f64 / union as f64
}

fn number_set(text: &str) -> Vec<u64> {
    let mut v: Vec<u64> = numeric_values(text).into_iter().map(f64::to_bits).collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Multi-label linguistic patterns for one (example, prediction) pair.
///
/// The "prediction sentence" is the context sentence holding the located prediction;
/// when the prediction is not found in the context it is empty.
pub fn detect_patterns(example: &QAExample, prediction: &str) -> BTreeSet<Pattern> {
    let mut out = BTreeSet::new();
    let spans = sentence_spans(&example.context);
    let located = locate_prediction(example, prediction);
    let pred_sent_idx = located.map(|(s, _)| sentence_index(&spans, s));
    let sentence_text = |i: usize| {
        spans
            .get(i)
            .and_then(|&(s, e)| char_slice(&example.context, s, e))
            .unwrap_or("")
    };
    let pred_sentence = pred_sent_idx.map_or("", sentence_text);
    let gold = example.answers.first();
    let gold_sent_idx = gold.map(|a| sentence_index(&spans, a.answer_start));

    let q_words = lower_words(&example.question);
    let s_words = lower_words(pred_sentence);

    if q_words.iter().chain(&s_words).any(|w| is_negation_word(w)) {
        out.insert(Pattern::Negation);
    }

    if let Some(g) = gold {
        let (pk, gk) = (normalize_answer(prediction), normalize_answer(&g.text));
        if !pk.is_empty() && pk != gk {
            if let (Some(pt), Some(gt)) = (entity_type_of(prediction), entity_type_of(&g.text)) {
                if pt == gt {
                    out.insert(Pattern::EntitySubstitution);
                }
            }
        }
        let (pn, gn) = (number_set(prediction), number_set(&g.text));
        if (!pn.is_empty() || !gn.is_empty()) && pn != gn {
            out.insert(Pattern::Numeric);
        }
    }

    let in_distractor =
        located.is_some_and(|(ps, pe)| example.distractor_spans.iter().any(|&(ds, de)| ps >= ds && pe <= de));
    let opened = ADDITIVE_OPENERS
        .iter()
        .any(|o| s_words.len() >= o.len() && s_words[..o.len()].iter().zip(o.iter()).all(|(a, b)| a == b));
    if in_distractor || opened {
        out.insert(Pattern::Additive);
    }

    if let (Some(pi), Some(gi)) = (pred_sent_idx, gold_sent_idx) {
        let (ps, gs) = (sentence_text(pi), sentence_text(gi));
        if pi != gi && ps != gs && jaccard(&content_words(ps), &content_words(gs)) >= 0.6 {
            out.insert(Pattern::Paraphrase);
        }
    }

    if s_words.iter().any(|w| MODALS.contains(&w.as_str())) {
        out.insert(Pattern::Modal);
    }

    if has_comparative(&q_words)
        || has_comparative(&s_words)
        || q_words.iter().chain(&s_words).any(|w| is_superlative_word(w))
    {
        out.insert(Pattern::ComparativeSuperlative);
    }

    if q_words
        .iter()
        .chain(&s_words)
        .any(|w| TEMPORAL_CUES.contains(&w.as_str()))
    {
        out.insert(Pattern::Temporal);
    }

    if LIST_CUES.iter().any(|c| has_phrase(&s_words, c)) || pred_sentence.matches(',').count() >= 2 {
        out.insert(Pattern::ListEnumeration);
    }

    if q_words.iter().any(|w| PRONOUNS.contains(&w.as_str()))
        && !extract_entities(&example.question)
            .iter()
            .any(|e| e.entity_type.is_named())
    {
        out.insert(Pattern::Coreference);
    }

    out
}

/// One failed prediction with all five labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub example_id: String,
    pub question_type: QuestionType,
    pub answer_type: AnswerType,
    pub complexity: Complexity,
    pub error_type: ErrorType,
    pub patterns: BTreeSet<Pattern>,
}

pub fn classify_error(example: &QAExample, prediction: &str) -> ErrorRecord {
    ErrorRecord {
        example_id: example.id.clone(),
        question_type: classify_question_type(&example.question),
        answer_type: classify_answer_type(example.answers.first().map_or("", |a| a.text.as_str())),
        complexity: classify_complexity(&example.question),
        error_type: classify_error_type(example, prediction).0,
        patterns: detect_patterns(example, prediction),
    }
}

/// Accuracy row for a scheme applied to every example.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub total: usize,
    pub correct: usize,
}

impl AccuracyRow {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.correct as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TaxonomyReport {
    pub n_examples: usize,
    pub total_errors: usize,
    /// Keyed by the raw label, so "When" stays separate here.
    pub question_type: BTreeMap<String, AccuracyRow>,
    pub answer_type: BTreeMap<String, AccuracyRow>,
    pub complexity: BTreeMap<String, AccuracyRow>,
    pub error_type: BTreeMap<String, usize>,
    pub patterns: BTreeMap<String, usize>,
    /// Symmetric; the diagonal holds each pattern's own count.
    pub pattern_cooccurrence: BTreeMap<String, BTreeMap<String, usize>>,
    pub records: Vec<ErrorRecord>,
}

impl TaxonomyReport {
    /// Share of errors carrying `pattern`, in percent.
    pub fn pattern_share(&self, pattern: Pattern) -> f64 {
        share(
            self.patterns.get(pattern.label()).copied().unwrap_or(0),
            self.total_errors,
        )
    }

    /// Share of errors carrying both patterns, in percent.
    pub fn cooccurrence_share(&self, a: Pattern, b: Pattern) -> f64 {
        let n = self
            .pattern_cooccurrence
            .get(a.label())
            .and_then(|row| row.get(b.label()))
            .copied()
            .unwrap_or(0);
        share(n, self.total_errors)
    }
}

fn share(n: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        100.0 * n as f64 / total as f64
    }
}

/// Classify every example; only exact-match failures produce an [`ErrorRecord`].
pub fn analyze(dataset: &Dataset, predictions: &PredictionSet) -> Result<TaxonomyReport> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    struct Row {
        q: QuestionType,
        a: AnswerType,
        c: Complexity,
        correct: bool,
        record: Option<ErrorRecord>,
    }
    let rows: Vec<Row> = dataset
        .examples
        .par_iter()
        .map(|ex| {
            let pred = predictions.get(&ex.id).unwrap_or("");
            let gold: Vec<&str> = ex.gold_texts();
            let correct = exact_match(pred, &gold) == 1;
            Row {
                q: classify_question_type(&ex.question),
                a: classify_answer_type(gold.first().copied().unwrap_or("")),
                c: classify_complexity(&ex.question),
                correct,
                record: (!correct).then(|| classify_error(ex, pred)),
            }
        })
        .collect();

    let mut rep = TaxonomyReport {
        n_examples: rows.len(),
        ..Default::default()
    };
    for p in Pattern::ALL {
        rep.patterns.insert(p.label().to_string(), 0);
        let row = Pattern::ALL.iter().map(|q| (q.label().to_string(), 0)).collect();
        rep.pattern_cooccurrence.insert(p.label().to_string(), row);
    }
    for e in ErrorType::ALL {
        rep.error_type.insert(e.label().to_string(), 0);
    }
    for r in rows {
        bump(&mut rep.question_type, r.q.label(), r.correct);
        bump(&mut rep.answer_type, r.a.label(), r.correct);
        bump(&mut rep.complexity, r.c.label(), r.correct);
        if let Some(rec) = r.record {
            *rep.error_type.entry(rec.error_type.label().to_string()).or_default() += 1;
            for p in &rec.patterns {
                *rep.patterns.entry(p.label().to_string()).or_default() += 1;
                for q in &rec.patterns {
                    *rep.pattern_cooccurrence
                        .get_mut(p.label())
                        .and_then(|row| row.get_mut(q.label()))
                        .expect("matrix initialised for every pattern") += 1;
                }
            }
            rep.records.push(rec);
        }
    }
    rep.total_errors = rep.records.len();
    Ok(rep)
}

fn bump(map: &mut BTreeMap<String, AccuracyRow>, label: &str, correct: bool) {
    let row = map.entry(label.to_string()).or_default();
    row.total += 1;
    row.correct += usize::from(correct);
}
