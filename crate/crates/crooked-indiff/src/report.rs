//! Machine-readable experiment reports: a fixed column schema, one row per
//! trial, and one summary row. Emission is byte-deterministic so reruns of
//! the same config diff clean.

use crate::error::Result;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    #[default]
    JsonLines,
    Csv,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub experiment: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Same arity as `columns`.
    pub summary: Vec<String>,
    /// Assertion-style experiments set this; `Some(false)` means the run
    /// failed its own claim.
    pub passed: Option<bool>,
}

impl Report {
    pub fn new(experiment: &str, columns: &[&str]) -> Self {
        Report {
            experiment: experiment.to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: Vec::new(),
            passed: None,
        }
    }

    pub fn push_row(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.rows.push(cells);
    }

    pub fn set_summary(&mut self, cells: Vec<String>) {
        debug_assert_eq!(cells.len(), self.columns.len());
        self.summary = cells;
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        if !self.summary.is_empty() {
            out.push_str(&self.summary.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        let emit = |out: &mut String, cells: &[String]| {
            out.push('{');
            for (i, (col, cell)) in self.columns.iter().zip(cells).enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let quoted = cell.parse::<f64>().is_err();
                if quoted {
                    let _ = write!(out, "\"{col}\":\"{cell}\"");
                } else {
                    let _ = write!(out, "\"{col}\":{cell}");
                }
            }
            out.push_str("}\n");
        };
        for row in &self.rows {
            emit(&mut out, row);
        }
        if !self.summary.is_empty() {
            emit(&mut out, &self.summary);
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> String {
        match format {
            ReportFormat::JsonLines => self.to_jsonl(),
            ReportFormat::Csv => self.to_csv(),
        }
    }

    pub fn write(&self, path: &Path, format: ReportFormat) -> Result<()> {
        std::fs::write(path, self.render(format))?;
        Ok(())
    }
}

/// Shortest-roundtrip float formatting; deterministic for a fixed build.
pub fn fmt_f64(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{v:.1}")
    } else {
        format!("{v}")
    }
}
