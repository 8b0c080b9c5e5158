//! Library side of the `bergman` command: resolved run configurations, the
//! routines behind each subcommand and report serialisation.

mod report;

use std::path::PathBuf;

use bergman_core::checks::identity_suite;
use bergman_core::integrate::lemma6_suite;
use bergman_core::norms::{
    besov_limit_check, bloch_norm_closed, extremal_sweep, first_axis_power_besov, first_axis_power_bloch,
    first_axis_power_derivatives, m_function, m_function_series, remark7_lower, remark8_bound,
    series_terms_for, tilde_norm_closed,
};
use bergman_core::{MCConfig, Params};
use serde::{Deserialize, Serialize};

pub use report::{config_from_report, emit_report, sig15, write_report, Format, Meta, Report, Row, Verdict};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] bergman_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("report has no rows")]
    EmptyReport,
    #[error("{0}")]
    Usage(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Norm,
    VerifyLemma6,
    MzProfile,
    ExtremalSweep,
    BesovLimit,
    IdentitySuite,
}

/// Verdict tolerances. Defaults match the acceptance thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Monte Carlo agreement in standard errors.
    pub sigma: f64,
    /// Relative agreement of Monte Carlo estimates with closed forms.
    pub rel: f64,
    /// Relative agreement between two closed-form routes.
    pub closed_rel: f64,
    /// Truncated series against the hypergeometric profile.
    pub series_rel: f64,
    /// Fraction of the semi-norm the largest sweep radius must reach
    /// (sweeps without `delta`).
    pub sweep_fraction: f64,
    /// Relative agreement of the low-order sweep term with its target.
    pub low_order_rel: f64,
    /// Relative agreement of Besov estimates with their closed forms.
    pub besov_rel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sigma: 4.0,
            rel: 0.01,
            closed_rel: 1e-9,
            series_rel: 1e-8,
            sweep_fraction: 0.95,
            low_order_rel: 0.05,
            besov_rel: 0.005,
        }
    }
}

/// A fully resolved invocation; embedded verbatim in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    pub params: Params,
    pub mc: MCConfig,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub as_stated: bool,
    pub delta: Option<f64>,
    pub p_list: Vec<f64>,
    pub r_list: Vec<f64>,
    pub kmax: Option<usize>,
    pub max_order: u32,
    /// Exponent `k` of the Besov test function `z₁^k`.
    pub power: Option<u32>,
    /// Random inputs per dimension for the identity suite.
    pub cases: usize,
    pub tolerances: Tolerances,
}

impl RunConfig {
    /// Defaults for `command` at `params`.
    pub fn new(command: Command, params: Params) -> Self {
        Self {
            command,
            params,
            mc: MCConfig::new(1_000_000, 0),
            output: None,
            format: Format::Json,
            as_stated: false,
            delta: None,
            p_list: vec![2.0, 10.0, 50.0, 200.0],
            r_list: vec![0.9, 0.99, 0.999],
            kmax: None,
            max_order: 4,
            power: None,
            cases: 200,
            tolerances: Tolerances::default(),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        (a - b).abs() / b.abs()
    }
}

fn norm_rows(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    let p = &cfg.params;
    let tol = cfg.tolerances.closed_rel;
    let tilde = tilde_norm_closed(p)?;
    let via_gauss = m_function(p, 1.0)?;
    let bloch_default = bloch_norm_closed(p, false)?;
    let bloch_as_stated = bloch_norm_closed(p, true)?;
    let selected = if cfg.as_stated { bloch_as_stated } else { bloch_default };
    Ok(vec![
        Row::new("tilde", via_gauss, 0.0, tilde, rel(via_gauss, tilde) <= tol),
        Row::closed("bloch", selected),
        Row::closed("bloch_default", bloch_default),
        Row::closed("bloch_as_stated", bloch_as_stated),
        Row::closed("remark7_lower", remark7_lower(p)?),
        Row::closed("remark8_bound_p2", remark8_bound(p, 2.0)?).at_exponent(2.0),
    ])
}

fn lemma6_rows(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    let t = &cfg.tolerances;
    Ok(lemma6_suite(&cfg.params, cfg.max_order, &cfg.mc)?
        .into_iter()
        .map(|row| {
            let pass = row.sigma_ok(t.sigma) && row.rel_error() <= t.rel;
            Row::new(format!("m={}", row.m), row.estimate.value.re, row.estimate.stderr, row.closed_form, pass)
        })
        .collect())
}

fn profile_rows(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    let p = &cfg.params;
    let tol = cfg.tolerances.series_rel;
    cfg.r_list
        .iter()
        .map(|&r| {
            let row = if r == 1.0 {
                let v = m_function(p, 1.0)?;
                let t = tilde_norm_closed(p)?;
                Row::new("m(1) via Gauss", v, 0.0, t, rel(v, t) <= cfg.tolerances.closed_rel)
            } else {
                let kmax = cfg.kmax.unwrap_or_else(|| series_terms_for(r));
                let s = m_function_series(p, r, kmax)?;
                let h = m_function(p, r)?;
                Row::new(format!("series kmax={kmax}"), s, 0.0, h, rel(s, h) <= tol)
            };
            Ok(row.at_radius(r))
        })
        .collect()
}

fn sweep_rows(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    let t = &cfg.tolerances;
    let rows = extremal_sweep(&cfg.params, &cfg.r_list, cfg.delta, &cfg.mc)?;
    let r_max = cfg.r_list.iter().copied().fold(f64::MIN, f64::max);
    let mut out = Vec::new();
    for row in rows {
        let est = row.estimate.value.re;
        let below = est <= row.closed_form_target + t.sigma * row.estimate.stderr;
        let reaches = cfg.delta.is_some() || row.r < r_max || est >= t.sweep_fraction * row.closed_form_target;
        out.push(
            Row::new("semi-norm", est, row.estimate.stderr, row.closed_form_target, below && reaches).at_radius(row.r),
        );
        if let Some(low) = row.low_order {
            let v = low.estimate.value.re;
            out.push(
                Row::new("low-order term", v, low.estimate.stderr, low.target, rel(v, low.target) <= t.low_order_rel)
                    .at_radius(row.r),
            );
        }
    }
    Ok(out)
}

fn besov_rows(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    let p = &cfg.params;
    let t = &cfg.tolerances;
    let k = cfg.power.unwrap_or(p.order());
    let table = besov_limit_check(p, first_axis_power_derivatives(p, k), &cfg.p_list, &cfg.mc)?;
    let mut out: Vec<Row> = table
        .rows
        .iter()
        .map(|row| {
            let est = row.estimate;
            let closed = first_axis_power_besov(p, k, est.p)?;
            let pass = rel(est.value, closed) <= t.besov_rel;
            Ok(Row::new(format!("beta_p(z1^{k})"), est.value, est.stderr, closed, pass).at_exponent(est.p))
        })
        .collect::<Result<_, CliError>>()?;
    let bloch = first_axis_power_bloch(p, k);
    out.push(Row::new(
        "bloch semi-norm scan",
        table.bloch_target,
        0.0,
        bloch,
        rel(table.bloch_target, bloch) <= 1e-3,
    ));
    let trend = if table.eventually_monotone { 1.0 } else { 0.0 };
    out.push(Row::new("eventually monotone", trend, 0.0, 1.0, table.eventually_monotone));
    Ok(out)
}

fn identity_rows(cfg: &RunConfig) -> Result<Vec<Row>, CliError> {
    Ok(identity_suite(cfg.mc.seed, cfg.cases, 4)?
        .into_iter()
        .map(|c| Row::new(c.name, c.max_error, 0.0, c.tolerance, c.passed))
        .collect())
}

/// Executes `cfg.command` and assembles its report. Writing the report is
/// left to the caller.
pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let rows = match cfg.command {
        Command::Norm => norm_rows(cfg)?,
        Command::VerifyLemma6 => lemma6_rows(cfg)?,
        Command::MzProfile => profile_rows(cfg)?,
        Command::ExtremalSweep => sweep_rows(cfg)?,
        Command::BesovLimit => besov_rows(cfg)?,
        Command::IdentitySuite => identity_rows(cfg)?,
    };
    Ok(Report::new(cfg, rows))
}

/// Exit status for a finished run: 0 on pass, 2 on a failed verdict.
pub fn exit_code(report: &Report) -> i32 {
    if report.passed() {
        0
    } else {
        2
    }
}

/// Exit status for errors raised before a verdict exists.
pub const USAGE_EXIT: i32 = 1;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norm_rows_match_closed_forms() {
        let cfg = RunConfig::new(Command::Norm, Params::new(1, 1, 0.0).unwrap());
        let report = run(&cfg).unwrap();
        assert!(report.passed());
        let get = |label: &str| report.rows.iter().find(|r| r.label == label).unwrap().estimate;
        assert!((get("tilde") - 2.546479089).abs() < 1e-9);
        assert!((get("bloch_default") - 3.546479089).abs() < 1e-9);
        assert!((get("bloch_as_stated") - 4.546479089).abs() < 1e-9);
        assert!((get("remark7_lower") - 2.0).abs() < 1e-12);
        assert_eq!(get("bloch"), get("bloch_default"));
    }

    #[test]
    fn profile_rows_pass() {
        let mut cfg = RunConfig::new(Command::MzProfile, Params::new(2, 2, 0.5).unwrap());
        cfg.r_list = vec![0.0, 0.5, 0.9, 0.99, 1.0];
        let report = run(&cfg).unwrap();
        assert!(report.passed(), "{:?}", report.rows);
        assert_eq!(report.rows.len(), 5);
    }
}
