//! Results tables, plot data and the artifact record on disk.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{HarnessError, Result};
use crate::pipeline::{CellReport, RunArtifacts, Timing};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(HarnessError::Config(format!("--format: expected csv or json, got `{s}`"))),
        }
    }
}

pub const RESULTS_CSV: &str = "results.csv";
pub const RESULTS_JSON: &str = "results.json";
pub const RISK_BARS_CSV: &str = "risk_bars.csv";
pub const GAP_SCATTER_CSV: &str = "gap_scatter.csv";
pub const ARTIFACTS_JSON: &str = "artifacts.json";
pub const TIMING_JSON: &str = "timing.json";

const METRIC_COLUMNS: [&str; 8] = ["specificity", "recall", "bac", "auc", "ubac", "rbac", "tbac", "mia"];
const GAP_COLUMNS: [&str; 5] = ["gap_mean", "gap_ubac", "gap_rbac", "gap_tbac", "gap_mia"];

/// Column names of `results.csv` in order.
pub fn result_columns(risks: &[String]) -> Vec<String> {
    let mut cols: Vec<String> = ["dataset", "fraction", "method"].iter().map(|s| s.to_string()).collect();
    cols.extend(METRIC_COLUMNS.iter().map(|s| s.to_string()));
    cols.extend(risks.iter().map(|r| format!("risk_{r}")));
    cols.extend(GAP_COLUMNS.iter().map(|s| s.to_string()));
    cols
}

/// One row per cell; `None` marks an absent GAP field.
pub fn result_rows(artifacts: &RunArtifacts) -> Vec<Vec<Value>> {
    artifacts.reports.iter().map(|c| row(c, &artifacts.risks)).collect()
}

fn row(c: &CellReport, risks: &[String]) -> Vec<Value> {
    let r = &c.report;
    let mut out = vec![
        Value::from(c.dataset.clone()),
        Value::from(c.fraction),
        Value::from(c.method.name()),
    ];
    out.extend(
        [r.specificity, r.recall, r.bac, r.auc, r.ubac, r.rbac, r.tbac, r.mia]
            .into_iter()
            .map(Value::from),
    );
    out.extend(risks.iter().map(|name| r.risk(name).map_or(Value::Null, Value::from)));
    match &r.gap {
        Some(g) => out.extend([g.mean, g.ubac, g.rbac, g.tbac, g.mia].into_iter().map(Value::from)),
        None => out.extend(std::iter::repeat_n(Value::Null, GAP_COLUMNS.len())),
    }
    out
}

pub(crate) fn cell_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Number(n) => match n.as_f64() {
            Some(f) if n.is_f64() => format!("{f}"),
            _ => n.to_string(),
        },
        other => other.to_string(),
    }
}

fn write_csv(path: &Path, header: &[String], rows: &[Vec<Value>]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| unwritable(path, e))?;
    w.write_record(header).map_err(|e| unwritable(path, e))?;
    for r in rows {
        w.write_record(r.iter().map(cell_text)).map_err(|e| unwritable(path, e))?;
    }
    w.flush().map_err(|e| unwritable(path, e))
}

fn unwritable(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Runtime(format!("{}: {e}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| unwritable(path, e))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifacts serialize");
    s.push('\n');
    s
}

fn ensure_dir(out: &Path) -> Result<()> {
    fs::create_dir_all(out).map_err(|e| unwritable(out, e))
}

/// The rows of `results.csv` as JSON objects.
pub fn results_json(artifacts: &RunArtifacts) -> Value {
    let cols = result_columns(&artifacts.risks);
    Value::Array(
        result_rows(artifacts)
            .into_iter()
            .map(|r| Value::Object(cols.iter().cloned().zip(r).collect::<Map<_, _>>()))
            .collect(),
    )
}

/// Writes `results.csv` or `results.json` under `out` and returns the path.
pub fn emit_report(artifacts: &RunArtifacts, out: &Path, format: Format) -> Result<PathBuf> {
    ensure_dir(out)?;
    match format {
        Format::Csv => {
            let path = out.join(RESULTS_CSV);
            write_csv(&path, &result_columns(&artifacts.risks), &result_rows(artifacts))?;
            Ok(path)
        }
        Format::Json => {
            let path = out.join(RESULTS_JSON);
            write_text(&path, &to_json(&results_json(artifacts)))?;
            Ok(path)
        }
    }
}

/// Writes `risk_bars.csv` and `gap_scatter.csv`.
pub fn emit_plot_data(artifacts: &RunArtifacts, out: &Path) -> Result<(PathBuf, PathBuf)> {
    ensure_dir(out)?;
    let risk_cols: Vec<String> = artifacts.risks.iter().map(|r| format!("risk_{r}")).collect();
    let risk_vals = |c: &CellReport| -> Vec<Value> {
        artifacts
            .risks
            .iter()
            .map(|n| c.report.risk(n).map_or(Value::Null, Value::from))
            .collect()
    };

    let bars = out.join(RISK_BARS_CSV);
    let mut header = vec!["method".to_string(), "fraction".to_string()];
    header.extend(risk_cols.iter().cloned());
    let rows: Vec<Vec<Value>> = artifacts
        .reports
        .iter()
        .map(|c| {
            let mut r = vec![Value::from(c.method.name()), Value::from(c.fraction)];
            r.extend(risk_vals(c));
            r
        })
        .collect();
    write_csv(&bars, &header, &rows)?;

    let scatter = out.join(GAP_SCATTER_CSV);
    let mut header = vec!["method".to_string(), "fraction".to_string(), "gap_mean".to_string()];
    header.extend(risk_cols);
    let rows: Vec<Vec<Value>> = artifacts
        .reports
        .iter()
        .map(|c| {
            let mut r = vec![
                Value::from(c.method.name()),
                Value::from(c.fraction),
                c.report.gap.map_or(Value::Null, |g| Value::from(g.mean)),
            ];
            r.extend(risk_vals(c));
            r
        })
        .collect();
    write_csv(&scatter, &header, &rows)?;
    Ok((bars, scatter))
}

/// Writes `artifacts.json` (deterministic) and `timing.json`.
pub fn write_artifacts(artifacts: &RunArtifacts, out: &Path) -> Result<()> {
    ensure_dir(out)?;
    write_text(&out.join(ARTIFACTS_JSON), &to_json(artifacts))?;
    write_text(&out.join(TIMING_JSON), &to_json(&artifacts.timing))
}

pub fn read_artifacts(out: &Path) -> Result<RunArtifacts> {
    let path = out.join(ARTIFACTS_JSON);
    let text = fs::read_to_string(&path).map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))
}

pub fn read_timing(out: &Path) -> Result<Timing> {
    let path = out.join(TIMING_JSON);
    let text = fs::read_to_string(&path).map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Runtime(format!("{}: {e}", path.display())))
}
