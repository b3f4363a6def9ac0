//! Rendering of a [`TaxonomyReport`] as JSON, CSV or markdown tables.
//!
//! The five tables are: performance by question type, answer type and question
//! complexity (`Type | Total | Correct | Accuracy (%)`), then error types and
//! linguistic patterns (`Count | %`). Rows are sorted by descending count, ties by label.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::{AccuracyRow, QuestionType, TaxonomyReport};
use crate::text::format_pct;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Markdown,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

/// One of the five summary tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Table {
    QuestionType,
    AnswerType,
    Complexity,
    ErrorType,
    Patterns,
}

impl Table {
    pub const ALL: [Table; 5] = [
        Table::QuestionType,
        Table::AnswerType,
        Table::Complexity,
        Table::ErrorType,
        Table::Patterns,
    ];

    /// File stem used when tables are written separately.
    pub fn slug(self) -> &'static str {
        match self {
            Table::QuestionType => "question_type",
            Table::AnswerType => "answer_type",
            Table::Complexity => "complexity",
            Table::ErrorType => "error_type",
            Table::Patterns => "patterns",
        }
    }

    fn caption(self, report: &TaxonomyReport) -> String {
        match self {
            Table::QuestionType => "Performance by Question Type".into(),
            Table::AnswerType => "Performance by Answer Type".into(),
            Table::Complexity => "Performance by Question Complexity".into(),
            Table::ErrorType => "Error Type Distribution".into(),
            Table::Patterns => format!("Linguistic Patterns ({} Errors)", report.total_errors),
        }
    }

    fn header(self) -> &'static [&'static str] {
        match self {
            Table::ErrorType => &["Error Type", "Count", "%"],
            Table::Patterns => &["Pattern", "Count", "%"],
            _ => &["Type", "Total", "Correct", "Accuracy (%)"],
        }
    }

    /// Formatted rows in display order.
    pub fn rows(self, report: &TaxonomyReport) -> Vec<Vec<String>> {
        match self {
            Table::QuestionType => {
                let mut folded: Vec<(String, AccuracyRow)> = Vec::new();
                for q in QuestionType::ALL {
                    let Some(row) = report.question_type.get(q.label()) else {
                        continue;
                    };
                    let label = q.table_label().label();
                    match folded.iter_mut().find(|(l, _)| l == label) {
                        Some((_, acc)) => {
                            acc.total += row.total;
                            acc.correct += row.correct;
                        }
                        None => folded.push((label.to_string(), *row)),
                    }
                }
                accuracy_rows(folded)
            }
            Table::AnswerType => accuracy_rows(report.answer_type.iter().map(|(k, v)| (k.clone(), *v)).collect()),
            Table::Complexity => accuracy_rows(report.complexity.iter().map(|(k, v)| (k.clone(), *v)).collect()),
            Table::ErrorType => count_rows(&report.error_type, report.total_errors),
            Table::Patterns => count_rows(&report.patterns, report.total_errors),
        }
    }
}

fn accuracy_rows(mut rows: Vec<(String, AccuracyRow)>) -> Vec<Vec<String>> {
    rows.sort_by(|a, b| b.1.total.cmp(&a.1.total).then_with(|| a.0.cmp(&b.0)));
    rows.into_iter()
        .map(|(label, r)| {
            vec![
                label,
                r.total.to_string(),
                r.correct.to_string(),
                format_pct(r.accuracy()),
            ]
        })
        .collect()
}

fn count_rows(map: &std::collections::BTreeMap<String, usize>, total: usize) -> Vec<Vec<String>> {
    let mut rows: Vec<(&String, usize)> = map.iter().map(|(k, &v)| (k, v)).collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    rows.into_iter()
        .map(|(label, n)| {
            let pct = if total == 0 {
                0.0
            } else {
                100.0 * n as f64 / total as f64
            };
            vec![label.clone(), n.to_string(), format_pct(pct)]
        })
        .collect()
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))
}

/// One table as CSV with its own header row.
pub fn table_csv(report: &TaxonomyReport, table: Table) -> Result<Vec<u8>> {
    csv_bytes(table.header(), &table.rows(report))
}

/// Pattern distribution for plotting: pattern, count, percent of errors.
pub fn pattern_figure_csv(report: &TaxonomyReport) -> Result<Vec<u8>> {
    csv_bytes(&["pattern", "count", "percent"], &Table::Patterns.rows(report))
}

fn markdown(report: &TaxonomyReport) -> Vec<u8> {
    let mut out = String::new();
    for (i, t) in Table::ALL.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        let _ = writeln!(out, "### {}\n", t.caption(report));
        let header = t.header();
        let _ = writeln!(out, "| {} |", header.join(" | "));
        let align: Vec<&str> = header
            .iter()
            .enumerate()
            .map(|(k, _)| if k == 0 { "---" } else { "---:" })
            .collect();
        let _ = writeln!(out, "| {} |", align.join(" | "));
        for r in t.rows(report) {
            let _ = writeln!(out, "| {} |", r.join(" | "));
        }
    }
    out.into_bytes()
}

/// All five tables in one CSV, keyed by a leading `table` column.
fn long_csv(report: &TaxonomyReport) -> Result<Vec<u8>> {
    let mut rows = Vec::new();
    for t in Table::ALL {
        let is_count = matches!(t, Table::ErrorType | Table::Patterns);
        for r in t.rows(report) {
            let mut row = vec![t.slug().to_string(), r[0].clone()];
            if is_count {
                row.extend([String::new(), String::new(), String::new(), r[1].clone(), r[2].clone()]);
            } else {
                row.extend([r[1].clone(), r[2].clone(), r[3].clone(), String::new(), String::new()]);
            }
            rows.push(row);
        }
    }
    csv_bytes(
        &["table", "type", "total", "correct", "accuracy_pct", "count", "pct"],
        &rows,
    )
}

/// Render the report. Output depends only on the report's contents.
pub fn emit_report(report: &TaxonomyReport, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(report).map_err(|e| Error::MalformedJson(e.to_string()))?;
            v.push(b'\n');
            Ok(v)
        }
        Format::Csv => long_csv(report),
        Format::Markdown => Ok(markdown(report)),
    }
}
