//! Data model and I/O for SQuAD-format datasets, augmented JSONL and prediction files.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use serde::de::{MapAccess, Visitor};
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::text::{char_len, contains_negation, CharIndex};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Answer {
    pub text: String,
    /// Character (not byte) offset into the context.
    pub answer_start: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Clean,
    Addsent,
    Augmented,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackType {
    Paraphrase,
    EntitySwap,
    NegationAttack,
    NumericAttack,
    AdditiveNegation,
    TransformativeNegation,
    EntitySubstitution,
}

impl AttackType {
    pub const ALL: [AttackType; 7] = [
        AttackType::Paraphrase,
        AttackType::EntitySwap,
        AttackType::NegationAttack,
        AttackType::NumericAttack,
        AttackType::AdditiveNegation,
        AttackType::TransformativeNegation,
        AttackType::EntitySubstitution,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AttackType::Paraphrase => "paraphrase",
            AttackType::EntitySwap => "entity_swap",
            AttackType::NegationAttack => "negation_attack",
            AttackType::NumericAttack => "numeric_attack",
            AttackType::AdditiveNegation => "additive_negation",
            AttackType::TransformativeNegation => "transformative_negation",
            AttackType::EntitySubstitution => "entity_substitution",
        }
    }

    pub fn parse(s: &str) -> Option<AttackType> {
        AttackType::ALL.into_iter().find(|a| a.as_str() == s)
    }
}

impl fmt::Display for AttackType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn default_weight() -> f64 {
    1.0
}

/// One question/context/answer record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QAExample {
    pub id: String,
    pub question: String,
    pub context: String,
    pub answers: Vec<Answer>,
    #[serde(default)]
    pub is_impossible: bool,
    pub origin: Origin,
    #[serde(default)]
    pub attack_type: Option<AttackType>,
    #[serde(default = "default_weight")]
    pub loss_weight: f64,
    #[serde(default)]
    pub is_negation: bool,
    #[serde(default)]
    pub is_entity_rich: bool,
    /// Half-open character ranges `[start, end)` of injected distractor text.
    #[serde(default)]
    pub distractor_spans: Vec<(usize, usize)>,
}

impl QAExample {
    pub fn new(
        id: impl Into<String>,
        question: impl Into<String>,
        context: impl Into<String>,
        answers: Vec<Answer>,
    ) -> Self {
        QAExample {
            id: id.into(),
            question: question.into(),
            context: context.into(),
            answers,
            is_impossible: false,
            origin: Origin::Clean,
            attack_type: None,
            loss_weight: 1.0,
            is_negation: false,
            is_entity_rich: false,
            distractor_spans: Vec::new(),
        }
    }

    pub fn gold_texts(&self) -> Vec<&str> {
        self.answers.iter().map(|a| a.text.as_str()).collect()
    }

    /// True when the question or the context carries a negation marker.
    pub fn has_negation_marker(&self) -> bool {
        contains_negation(&self.question) || contains_negation(&self.context)
    }

    /// Checks every invariant of the record; the first violation is returned.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let idx = CharIndex::new(&self.context);
        if let Some(a) = self.answers.iter().find(|a| offset_mismatch(&idx, a).is_some()) {
            return Err(format!(
                "answer {:?} does not occur at offset {}",
                a.text, a.answer_start
            ));
        }
        if self.is_impossible && !self.answers.is_empty() {
            return Err("impossible example carries answers".into());
        }
        if !(self.loss_weight.is_finite() && self.loss_weight > 0.0) {
            return Err(format!("loss_weight {} is not positive", self.loss_weight));
        }
        let mut prev_end = 0;
        for (i, &(s, e)) in self.distractor_spans.iter().enumerate() {
            if s >= e || e > idx.len() {
                return Err(format!("distractor span {s}..{e} out of bounds"));
            }
            if i > 0 && s < prev_end {
                return Err("distractor spans overlap or are unsorted".into());
            }
            prev_end = e;
        }
        Ok(())
    }
}

fn offset_mismatch(idx: &CharIndex<'_>, a: &Answer) -> Option<String> {
    let end = a.answer_start + char_len(&a.text);
    match idx.slice(a.answer_start, end) {
        Some(found) if found == a.text => None,
        Some(found) => Some(found.to_string()),
        None => Some(String::new()),
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Dataset {
    pub examples: Vec<QAExample>,
    pub source_label: String,
    pub version: String,
}

impl Dataset {
    pub fn new(examples: Vec<QAExample>, source_label: impl Into<String>) -> Result<Self> {
        let ds = Dataset {
            examples,
            source_label: source_label.into(),
            version: String::new(),
        };
        ds.check_unique_ids()?;
        Ok(ds)
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn check_unique_ids(&self) -> Result<()> {
        let mut seen = HashSet::with_capacity(self.examples.len());
        for ex in &self.examples {
            if !seen.insert(ex.id.as_str()) {
                return Err(Error::DuplicateId(ex.id.clone()));
            }
        }
        Ok(())
    }
}

/// How answer-offset mismatches are handled while parsing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CheckMode {
    /// Abort on the first mismatch.
    #[default]
    Strict,
    /// Skip the offending example and record a warning.
    Lenient,
}

/// A parsed value plus any non-fatal diagnostics.
#[derive(Debug, Clone)]
pub struct Parsed<T> {
    pub value: T,
    pub warnings: Vec<String>,
}

fn field<'v>(obj: &'v Value, key: &str, path: &str) -> Result<&'v Value> {
    obj.get(key)
        .ok_or_else(|| Error::schema(format!("{path}.{key}"), "missing field"))
}

fn str_field(obj: &Value, key: &str, path: &str) -> Result<String> {
    field(obj, key, path)?
        .as_str()
        .map(str::to_owned)
        .ok_or_else(|| Error::schema(format!("{path}.{key}"), "expected string"))
}

fn array_field<'v>(obj: &'v Value, key: &str, path: &str) -> Result<&'v Vec<Value>> {
    field(obj, key, path)?
        .as_array()
        .ok_or_else(|| Error::schema(format!("{path}.{key}"), "expected array"))
}

/// Flatten a SQuAD v1.1 JSON document into a [`Dataset`].
///
/// Every answer offset is checked against the context. In strict mode the first
/// mismatch aborts with [`Error::OffsetMismatch`]; in lenient mode the example is
/// dropped and a warning naming its id is returned.
pub fn parse_squad(json: &[u8], mode: CheckMode) -> Result<Parsed<Dataset>> {
    let root: Value = serde_json::from_slice(json).map_err(|e| Error::MalformedJson(e.to_string()))?;
    if !root.is_object() {
        return Err(Error::schema("$", "expected object"));
    }
    let version = match root.get("version") {
        None => String::new(),
        Some(Value::String(s)) => s.clone(),
        Some(_) => return Err(Error::schema("$.version", "expected string")),
    };
    let mut examples = Vec::new();
    let mut warnings = Vec::new();
    let mut seen = HashSet::new();
    for (ai, article) in array_field(&root, "data", "$")?.iter().enumerate() {
        let apath = format!("$.data[{ai}]");
        if !article.is_object() {
            return Err(Error::schema(apath, "expected object"));
        }
        for (pi, para) in array_field(article, "paragraphs", &apath)?.iter().enumerate() {
            let ppath = format!("{apath}.paragraphs[{pi}]");
            let context = str_field(para, "context", &ppath)?;
            let cidx = CharIndex::new(&context);
            for (qi, qa) in array_field(para, "qas", &ppath)?.iter().enumerate() {
                let qpath = format!("{ppath}.qas[{qi}]");
                let id = str_field(qa, "id", &qpath)?;
                let question = str_field(qa, "question", &qpath)?;
                let is_impossible = match qa.get("is_impossible") {
                    None => false,
                    Some(Value::Bool(b)) => *b,
                    Some(_) => return Err(Error::schema(format!("{qpath}.is_impossible"), "expected bool")),
                };
                let mut answers = Vec::new();
                for (ni, ans) in array_field(qa, "answers", &qpath)?.iter().enumerate() {
                    let npath = format!("{qpath}.answers[{ni}]");
                    let text = str_field(ans, "text", &npath)?;
                    let start = field(ans, "answer_start", &npath)?.as_u64().ok_or_else(|| {
                        Error::schema(format!("{npath}.answer_start"), "expected non-negative integer")
                    })?;
                    answers.push(Answer {
                        text,
                        answer_start: start as usize,
                    });
                }
                if is_impossible && !answers.is_empty() {
                    return Err(Error::schema(qpath, "impossible question carries answers"));
                }
                if let Some((a, found)) = answers.iter().find_map(|a| offset_mismatch(&cidx, a).map(|f| (a, f))) {
                    let err = Error::OffsetMismatch {
                        id: id.clone(),
                        start: a.answer_start,
                        expected: a.text.clone(),
                        found,
                    };
                    match mode {
                        CheckMode::Strict => return Err(err),
                        CheckMode::Lenient => {
                            log::warn!("{err}; skipping");
                            warnings.push(err.to_string());
                            continue;
                        }
                    }
                }
                if !seen.insert(id.clone()) {
                    return Err(Error::DuplicateId(id));
                }
                let mut ex = QAExample::new(id, question, context.clone(), answers);
                ex.is_impossible = is_impossible;
                examples.push(ex);
            }
        }
    }
    Ok(Parsed {
        value: Dataset {
            examples,
            source_label: "squad".into(),
            version,
        },
        warnings,
    })
}

/// Map from example id to predicted answer text.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PredictionSet {
    pub answers: BTreeMap<String, String>,
}

impl PredictionSet {
    pub fn get(&self, id: &str) -> Option<&str> {
        self.answers.get(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.answers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.answers.is_empty()
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for PredictionSet {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        PredictionSet {
            answers: iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
        }
    }
}

/// JSON object entries in document order, duplicates preserved.
struct OrderedEntries(Vec<(String, String)>);

impl<'de> Deserialize<'de> for OrderedEntries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = OrderedEntries;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an object mapping ids to answer strings")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut m: A) -> std::result::Result<Self::Value, A::Error> {
                let mut out = Vec::new();
                while let Some((k, v)) = m.next_entry::<String, String>()? {
                    out.push((k, v));
                }
                Ok(OrderedEntries(out))
            }
        }
        d.deserialize_map(V)
    }
}

/// Parse a flat `{id: answer}` predictions file.
///
/// Duplicate keys are an error in strict mode; in lenient mode the last value wins
/// and a warning is recorded.
pub fn parse_predictions(json: &[u8], mode: CheckMode) -> Result<Parsed<PredictionSet>> {
    let entries: OrderedEntries = serde_json::from_slice(json).map_err(|e| Error::MalformedJson(e.to_string()))?;
    let mut answers = BTreeMap::new();
    let mut warnings = Vec::new();
    for (k, v) in entries.0 {
        if answers.contains_key(&k) {
            match mode {
                CheckMode::Strict => return Err(Error::DuplicateId(k)),
                CheckMode::Lenient => {
                    let w = format!("duplicate prediction id {k:?}; keeping the last value");
                    log::warn!("{w}");
                    warnings.push(w);
                }
            }
        }
        answers.insert(k, v);
    }
    Ok(Parsed {
        value: PredictionSet { answers },
        warnings,
    })
}

/// One JSON object per line, in dataset order, each line terminated by `\n`.
pub fn write_augmented(dataset: &Dataset) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for ex in &dataset.examples {
        serde_json::to_writer(&mut out, ex).map_err(|e| Error::MalformedJson(e.to_string()))?;
        out.push(b'\n');
    }
    Ok(out)
}

/// Read augmented JSONL. Blank lines are ignored; any other bad line is a
/// [`Error::SchemaViolation`] whose path names the 1-based line number.
pub fn read_augmented(jsonl: &[u8]) -> Result<Dataset> {
    let text = std::str::from_utf8(jsonl).map_err(|e| Error::schema("input", format!("invalid UTF-8: {e}")))?;
    let mut examples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let path = format!("line {}", i + 1);
        let ex: QAExample = serde_json::from_str(line).map_err(|e| Error::schema(path.clone(), e.to_string()))?;
        ex.validate().map_err(|m| Error::schema(path, m))?;
        examples.push(ex);
    }
    Dataset::new(examples, "jsonl")
}

/// Load either SQuAD JSON or augmented JSONL, sniffing the first non-space byte:
/// a document whose first line parses as a standalone object with an `id` is JSONL.
pub fn load_dataset(bytes: &[u8], mode: CheckMode) -> Result<Parsed<Dataset>> {
    let text = std::str::from_utf8(bytes).unwrap_or("");
    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("");
    let looks_jsonl = serde_json::from_str::<Value>(first)
        .map(|v| v.get("id").is_some() && v.get("context").is_some())
        .unwrap_or(false);
    if looks_jsonl {
        Ok(Parsed {
            value: read_augmented(bytes)?,
            warnings: Vec::new(),
        })
    } else {
        parse_squad(bytes, mode)
    }
}
