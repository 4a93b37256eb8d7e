//! Cross-validation reports and their text rendering. Wall-clock timing is
//! kept in a separate file so that reports compare byte for byte across
//! reruns.

use ews_core::gbdt::GbdtParams;
use ews_core::ingest::{Task, WindowConfig};
use ews_core::metrics::{MetricSummary, Summary};
use ews_core::pipeline::{FoldOutcome, ModelKind, SelectionMode};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub task: Task,
    pub model: ModelKind,
    pub selection: SelectionMode,
    pub seed: u64,
    pub window: WindowConfig,
    /// The warning window: lead time guaranteed before any target window,
    /// on top of each event's anticipation time.
    pub guaranteed_gap_minutes: usize,
    pub shuffled_training_labels: bool,
    pub patients: usize,
    pub rows: usize,
    pub positives: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gbdt_params: Option<GbdtParams>,
    pub folds: Vec<FoldOutcome>,
    pub summary: MetricSummary,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldTiming {
    pub fold: usize,
    pub selection_seconds: f64,
    pub train_seconds: f64,
    pub predict_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingReport {
    pub threads: usize,
    pub folds: Vec<FoldTiming>,
    pub total_seconds: f64,
}

pub fn round3(s: f64) -> f64 {
    (s * 1000.0).round() / 1000.0
}

fn cell(s: &Summary, decimals: usize) -> String {
    match (s.mean, s.std) {
        (Some(m), Some(sd)) => format!("{m:.decimals$}±{sd:.decimals$}"),
        _ => "n/a".into(),
    }
}

fn snake<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|j| j.as_str().map(String::from))
        .unwrap_or_default()
}

/// One row per report in the column order ER, RP, aveFA, aveAT, EF1.
pub fn render_table(reports: &[&RunReport]) -> String {
    let header = ["task", "model", "selection", "ER", "RP", "aveFA", "aveAT", "EF1"];
    let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
    for r in reports {
        let s = &r.summary;
        rows.push(vec![
            r.task.name().to_string(),
            snake(&r.model),
            snake(&r.selection) + if r.shuffled_training_labels { " (shuffled)" } else { "" },
            cell(&s.er, 3),
            cell(&s.rp, 3),
            cell(&s.ave_fa, 3),
            cell(&s.ave_at, 1),
            cell(&s.ef1, 3),
        ]);
    }
    let widths: Vec<usize> = (0..header.len())
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in &rows {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(v, w)| format!("{v}{}", " ".repeat(w - v.chars().count())))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    for r in reports {
        for note in &r.summary.notes {
            out.push_str(&format!("note ({} {}): {note}\n", r.task.name(), snake(&r.model)));
        }
        out.push_str(&format!(
            "aveAT excludes the {}-minute warning window guaranteed before every target window\n",
            r.guaranteed_gap_minutes
        ));
    }
    out
}

pub fn render_timing(t: &TimingReport) -> String {
    let mut out = format!("threads {}\nfold  selection_s  train_s  predict_s\n", t.threads);
    for f in &t.folds {
        out.push_str(&format!(
            "{:<4}  {:>11.3}  {:>7.3}  {:>9.3}\n",
            f.fold, f.selection_seconds, f.train_seconds, f.predict_seconds
        ));
    }
    out.push_str(&format!("total {:.3} s\n", t.total_seconds));
    out
}
