//! Report documents and their JSON/CSV serialisation.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use bergman_core::Params;
use serde::{Deserialize, Serialize};

use crate::{CliError, RunConfig};

/// Round to 15 significant digits.
pub fn sig15(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.14e}").parse().expect("formatted float parses back")
}

fn sig15_opt(x: Option<f64>) -> Option<f64> {
    x.map(sig15)
}

/// One line of a report: a numeric value against its target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<f64>,
    pub estimate: f64,
    pub stderr: f64,
    pub target: f64,
    /// `estimate / target`, absent when the target is zero.
    pub ratio: Option<f64>,
    pub pass: bool,
}

impl Row {
    pub fn new(label: impl Into<String>, estimate: f64, stderr: f64, target: f64, pass: bool) -> Self {
        let ratio = (target != 0.0).then(|| sig15(estimate / target));
        Self {
            label: label.into(),
            r: None,
            p: None,
            estimate: sig15(estimate),
            stderr: sig15(stderr),
            target: sig15(target),
            ratio,
            pass,
        }
    }

    /// A closed-form value reported on its own.
    pub fn closed(label: impl Into<String>, value: f64) -> Self {
        Self::new(label, value, 0.0, value, true)
    }

    pub fn at_radius(mut self, r: f64) -> Self {
        self.r = sig15_opt(Some(r));
        self
    }

    pub fn at_exponent(mut self, p: f64) -> Self {
        self.p = sig15_opt(Some(p));
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub timestamp_unix: u64,
    pub config: RunConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub meta: Meta,
    pub params: Params,
    pub rows: Vec<Row>,
    pub verdict: Verdict,
}

impl Report {
    pub fn new(config: &RunConfig, rows: Vec<Row>) -> Self {
        let verdict = if rows.iter().all(|r| r.pass) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        let timestamp_unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Self {
            meta: Meta {
                tool: "bergman".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                timestamp_unix,
                config: config.clone(),
            },
            params: config.params,
            rows,
            verdict,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

fn csv_number(x: f64) -> String {
    let x = sig15(x);
    if x.is_nan() {
        String::new()
    } else if x == 0.0 || (1e-5..1e16).contains(&x.abs()) {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}

/// Serialises `report`: the whole document as JSON, or one line per row
/// under the header `r,estimate,stderr,target,ratio` as CSV.
pub fn emit_report(report: &Report, format: Format) -> Result<String, CliError> {
    if report.rows.is_empty() {
        return Err(CliError::EmptyReport);
    }
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            Ok(s)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["r", "estimate", "stderr", "target", "ratio"])?;
            for row in &report.rows {
                w.write_record([
                    row.r.map(csv_number).unwrap_or_default(),
                    csv_number(row.estimate),
                    csv_number(row.stderr),
                    csv_number(row.target),
                    row.ratio.map(csv_number).unwrap_or_default(),
                ])?;
            }
            let bytes = w.into_inner().map_err(|e| CliError::Io(e.into_error()))?;
            Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
        }
    }
}

/// Serialises first and only then writes, so a failure leaves no file.
pub fn write_report(report: &Report, format: Format, path: &Path) -> Result<(), CliError> {
    let text = emit_report(report, format)?;
    fs::write(path, text)?;
    Ok(())
}

/// The configuration embedded in a JSON report.
pub fn config_from_report(json: &str) -> Result<RunConfig, CliError> {
    let report: Report = serde_json::from_str(json)?;
    Ok(report.meta.config)
}
