#![allow(dead_code)]

use std::path::PathBuf;

use advqa_core::corpus::{Answer, QAExample};
use advqa_core::taxonomy::ErrorRecord;
use advqa_core::{Dataset, PredictionSet};
use serde::Deserialize;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

pub fn fixture_bytes(name: &str) -> Vec<u8> {
    std::fs::read(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

#[derive(Debug, Deserialize)]
pub struct Expected {
    pub question_type: String,
    pub answer_type: String,
    pub complexity: String,
    pub error_type: String,
    pub patterns: Vec<String>,
}

#[derive(Debug, Deserialize)]
pub struct TaxonomyCase {
    pub id: String,
    pub question: String,
    pub context: String,
    pub gold: String,
    pub prediction: String,
    pub distractor: Option<String>,
    pub expected: Expected,
}

fn chars(s: &str) -> usize {
    s.chars().count()
}

impl TaxonomyCase {
    pub fn example(&self) -> QAExample {
        let byte = self.context.find(&self.gold).expect("gold occurs in context");
        let mut ex = QAExample::new(
            self.id.clone(),
            self.question.clone(),
            self.context.clone(),
            vec![Answer {
                text: self.gold.clone(),
                answer_start: chars(&self.context[..byte]),
            }],
        );
        if let Some(d) = &self.distractor {
            let end = chars(&self.context);
            ex.distractor_spans.push((end - chars(d), end));
        }
        ex
    }

    /// Field-by-field differences between the expected labels and `got`.
    pub fn mismatches(&self, got: &ErrorRecord) -> Vec<String> {
        let mut out = Vec::new();
        let mut check = |scheme: &str, want: &str, have: &str| {
            if want != have {
                out.push(format!("{} {scheme}: expected {want}, got {have}", self.id));
            }
        };
        check("question_type", &self.expected.question_type, got.question_type.label());
        check("answer_type", &self.expected.answer_type, got.answer_type.label());
        check("complexity", &self.expected.complexity, got.complexity.label());
        check("error_type", &self.expected.error_type, got.error_type.label());
        let have: Vec<&str> = got.patterns.iter().map(|p| p.label()).collect();
        let mut want: Vec<&str> = self.expected.patterns.iter().map(String::as_str).collect();
        want.sort_unstable();
        let mut have_sorted = have.clone();
        have_sorted.sort_unstable();
        check("patterns", &want.join("+"), &have_sorted.join("+"));
        out
    }
}

pub fn taxonomy_cases() -> Vec<TaxonomyCase> {
    serde_json::from_slice(&fixture_bytes("taxonomy_cases.json")).expect("fixture parses")
}

pub fn taxonomy_dataset(cases: &[TaxonomyCase]) -> (Dataset, PredictionSet) {
    let ds = Dataset::new(cases.iter().map(TaxonomyCase::example).collect(), "taxonomy-fixture").unwrap();
    let preds = cases.iter().map(|c| (c.id.as_str(), c.prediction.as_str())).collect();
    (ds, preds)
}
