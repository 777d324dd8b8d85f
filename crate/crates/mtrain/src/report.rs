//! Effort-saved report inputs and text rendering.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use mtrain_core::metrics::{EffectivenessReport, ExpectedSavings, InstallationTimes};
use serde::de::DeserializeOwned;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {source}")]
    Json { path: PathBuf, source: serde_json::Error },
}

fn load<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, DatasetError> {
    let text = fs::read_to_string(path).map_err(|source| DatasetError::Io { path: path.into(), source })?;
    serde_json::from_str(&text).map_err(|source| DatasetError::Json { path: path.into(), source })
}

/// A JSON array of `{name, training_minutes, task_minutes}`. Minutes may be
/// numbers or strings such as `"2 hours 15 minutes"`.
pub fn load_times(path: &Path) -> Result<Vec<InstallationTimes>, DatasetError> {
    load(path)
}

/// A JSON array of `{name, training_saved_pct, task_saved_pct}`.
pub fn load_expected(path: &Path) -> Result<Vec<ExpectedSavings>, DatasetError> {
    load(path)
}

const HEADERS: [&str; 3] = [
    "Installation",
    "Time spent in training a trainee using Interactive 3D",
    "Actual time spent to complete the installation by a trainee",
];

/// Percentage-of-effort-saved table, one row per installation, followed by
/// the means, objective verdicts and any discrepancy notes.
pub fn render_table(report: &EffectivenessReport) -> String {
    let mut cells: Vec<[String; 3]> = report
        .rows
        .iter()
        .map(|r| {
            [
                r.installation_name.clone(),
                format!("{:.1}%", r.training_saved_pct),
                format!("{:.1}%", r.task_saved_pct),
            ]
        })
        .collect();
    cells.push([
        "Mean".into(),
        format!("{:.1}%", report.mean_training_saved_pct),
        format!("{:.1}%", report.mean_task_saved_pct),
    ]);
    let mut widths = HEADERS.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }

    let mut out = String::new();
    let line = |out: &mut String, row: [&str; 3]| {
        let _ = writeln!(out, "{:<w0$}  {:>w1$}  {:>w2$}", row[0], row[1], row[2], w0 = widths[0], w1 = widths[1], w2 = widths[2]);
    };
    line(&mut out, HEADERS);
    let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 4));
    let (mean, rows) = cells.split_last().expect("mean row");
    for row in rows {
        line(&mut out, [&row[0], &row[1], &row[2]]);
    }
    let _ = writeln!(out, "{}", "-".repeat(widths.iter().sum::<usize>() + 4));
    line(&mut out, [&mean[0], &mean[1], &mean[2]]);
    out.push('\n');

    let verdict = |met: bool| if met { "met" } else { "not met" };
    let _ = writeln!(out, "Training time reduced by 30% or more: {}", verdict(report.training_objective_met));
    let _ = writeln!(out, "Task time reduced by 25% or more: {}", verdict(report.task_objective_met));
    if !report.discrepancies.is_empty() {
        let _ = writeln!(out, "\nDiscrepancies:");
        for note in &report.discrepancies {
            let _ = writeln!(out, "  - {note}");
        }
    }
    out
}
