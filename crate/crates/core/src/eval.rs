//! Per-suite accuracy of a detector and its two renderings.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{DatasetBundle, Suite, TextMode, SUITE_ORDER};
use crate::detector::BaselineModel;

pub const OOD_FOOTNOTE: &str =
    "* evaluation corpus differs from the training corpus; accuracies are out of distribution";

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("unknown format {0:?} (expected table or records)")]
    Format(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Table,
    Records,
}

impl std::str::FromStr for ReportFormat {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "table" => Ok(ReportFormat::Table),
            "records" => Ok(ReportFormat::Records),
            other => Err(EvalError::Format(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRow {
    pub suite: String,
    pub count: usize,
    pub correct: usize,
    /// `None` for an empty suite.
    pub accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ModelRef {
    pub checksum: String,
    pub seed: u64,
    pub train_accuracy: f64,
    pub corpus_checksum: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    pub overall: Option<f64>,
    pub mode: Option<TextMode>,
    pub model: ModelRef,
    pub footnote: Option<String>,
}

impl EvalReport {
    pub fn row(&self, suite: &str) -> Option<&EvalRow> {
        self.rows.iter().find(|r| r.suite == suite)
    }

    pub fn accuracy(&self, suite: &str) -> Option<f64> {
        self.row(suite).and_then(|r| r.accuracy)
    }
}

/// Table label of a suite.
pub fn display_name(suite: &str) -> &str {
    match suite {
        "human" => "None",
        "randomized" => "Randomized",
        "alpha_epsilon" => "Replace alpha, epsilon",
        "misspelling" => "Misspelling words",
        "delete_articles" => "Delete articles",
        "synonym" => "Synonym replacement",
        "random_word" => "Replace random word",
        "antonym" => "Antonym replacement",
        other => other,
    }
}

fn ratio(correct: usize, count: usize) -> Option<f64> {
    (count > 0).then(|| correct as f64 / count as f64)
}

/// Accuracy is the share of examples labeled as their suite expects. Rows
/// follow the fixed suite order; unknown suites come last.
pub fn evaluate_suites(model: &BaselineModel, suites: &[Suite]) -> EvalReport {
    let mut ordered: Vec<&Suite> = suites.iter().collect();
    ordered.sort_by_key(|s| SUITE_ORDER.iter().position(|n| *n == s.name).unwrap_or(usize::MAX));
    let rows: Vec<EvalRow> = ordered
        .iter()
        .map(|s| {
            let correct = s
                .examples
                .par_iter()
                .filter(|e| model.predict(&e.text).label == s.expected)
                .count();
            EvalRow {
                suite: s.name.clone(),
                count: s.examples.len(),
                correct,
                accuracy: ratio(correct, s.examples.len()),
            }
        })
        .collect();
    let total: usize = rows.iter().map(|r| r.count).sum();
    let correct: usize = rows.iter().map(|r| r.correct).sum();
    EvalReport {
        overall: ratio(correct, total),
        rows,
        mode: model.manifest.mode,
        model: ModelRef {
            checksum: model.checksum(),
            seed: model.manifest.seed,
            train_accuracy: model.manifest.train_accuracy,
            corpus_checksum: model.manifest.corpus_checksum.clone(),
        },
        footnote: None,
    }
}

/// [`evaluate_suites`] on a bundle's suites, flagging a corpus mismatch.
pub fn evaluate_bundle(model: &BaselineModel, bundle: &DatasetBundle) -> EvalReport {
    let mut report = evaluate_suites(model, &bundle.suites);
    report.mode = Some(bundle.manifest.mode);
    if model.manifest.corpus_checksum.as_deref() != Some(bundle.manifest.corpus_checksum.as_str()) {
        report.footnote = Some(OOD_FOOTNOTE.to_string());
    }
    report
}

/// `~93.65%(2490)`, or `n/a(0)` for an empty suite.
pub fn format_cell(accuracy: Option<f64>, count: usize) -> String {
    match accuracy {
        Some(a) => format!("~{:.2}%({count})", a * 100.0),
        None => format!("n/a({count})"),
    }
}

const HEADER_NAME: &str = "Operator Type";
const HEADER_VALUE: &str = "Accuracy";

fn render_table(report: &EvalReport) -> String {
    let width = report
        .rows
        .iter()
        .map(|r| display_name(&r.suite).chars().count())
        .max()
        .unwrap_or(0);
    let pad = |name: &str| format!("{name}{}", " ".repeat(width.saturating_sub(name.chars().count())));
    let mut out = format!("{}  {HEADER_VALUE}\n", pad(HEADER_NAME));
    for r in &report.rows {
        out.push_str(&format!("{}  {}\n", pad(display_name(&r.suite)), format_cell(r.accuracy, r.count)));
    }
    if report.rows.is_empty() {
        return out;
    }
    let total: usize = report.rows.iter().map(|r| r.count).sum();
    out.push_str(&format!("\nOverall  {}\n", format_cell(report.overall, total)));
    if let Some(mode) = report.mode {
        out.push_str(&format!("Mode  {mode}\n"));
    }
    if let Some(note) = &report.footnote {
        out.push_str(note);
        out.push('\n');
    }
    out
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum Record {
    Row(EvalRow),
    Summary {
        overall: Option<f64>,
        mode: Option<TextMode>,
        model: ModelRef,
        footnote: Option<String>,
    },
}

fn render_records(report: &EvalReport) -> String {
    let mut out = String::new();
    let mut push = |r: &Record| {
        out.push_str(&serde_json::to_string(r).expect("serializable"));
        out.push('\n');
    };
    for row in &report.rows {
        push(&Record::Row(row.clone()));
    }
    push(&Record::Summary {
        overall: report.overall,
        mode: report.mode,
        model: report.model.clone(),
        footnote: report.footnote.clone(),
    });
    out
}

pub fn render_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Table => render_table(report),
        ReportFormat::Records => render_records(report),
    }
}

/// Inverse of the records rendering.
pub fn parse_records(text: &str) -> Result<EvalReport, EvalError> {
    let mut report = EvalReport::default();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: Record = serde_json::from_str(line).map_err(|e| EvalError::Parse {
            line: i + 1,
            reason: e.to_string(),
        })?;
        match rec {
            Record::Row(r) => report.rows.push(r),
            Record::Summary {
                overall,
                mode,
                model,
                footnote,
            } => {
                report.overall = overall;
                report.mode = mode;
                report.model = model;
                report.footnote = footnote;
            }
        }
    }
    Ok(report)
}
