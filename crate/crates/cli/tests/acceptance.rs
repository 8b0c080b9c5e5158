//! Acceptance suite. Every test prints one `PASS`/`FAIL` line to stderr
//! and then asserts its verdict.

use std::f64::consts::PI;
use std::io::Write;
use std::process::Command as Process;
use std::time::{Duration, Instant};

use bergman_cli::{run, Command, RunConfig};
use bergman_core::integrate::lemma6_suite;
use bergman_core::norms::{
    besov_limit_check, bloch_first_term, extremal_sweep, first_axis_power_derivatives, low_order_integral_estimate,
    m_function, tilde_norm_closed,
};
use bergman_core::specfun::{hyp2f1, hyp2f1_at_one, HypParams};
use bergman_core::{MCConfig, MCEstimate, Params};

const SIGMA: f64 = 4.0;

fn verdict(id: &str, ok: bool, started: Instant, budget: Duration, detail: String) {
    let elapsed = started.elapsed();
    let ok = ok && elapsed <= budget;
    let tag = if ok { "PASS" } else { "FAIL" };
    let _ = writeln!(
        std::io::stderr(),
        "{tag} criterion {id}: {detail} [{:.2} s, budget {} s]",
        elapsed.as_secs_f64(),
        budget.as_secs()
    );
    assert!(ok, "criterion {id} failed: {detail}");
}

/// Stirling series after shifting the argument past 20.
fn ln_gamma(x: f64) -> f64 {
    let mut shift = 0.0;
    let mut y = x;
    while y < 20.0 {
        shift += y.ln();
        y += 1.0;
    }
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let series = inv * (1.0 / 12.0 - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 / 1680.0)));
    (y - 0.5) * y.ln() - y + 0.5 * (2.0 * PI).ln() + series - shift
}

fn gamma(x: f64) -> f64 {
    ln_gamma(x).exp()
}

fn grid() -> Vec<Params> {
    let mut out = Vec::new();
    for n in 1..=4 {
        for order in 1..=4 {
            for alpha in [0.0, 1.0, 2.5] {
                out.push(Params::new(n, order, alpha).unwrap());
            }
        }
    }
    out
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn same_bits(a: &MCEstimate, b: &MCEstimate) -> bool {
    a.value.re.to_bits() == b.value.re.to_bits()
        && a.value.im.to_bits() == b.value.im.to_bits()
        && a.stderr.to_bits() == b.stderr.to_bits()
}

#[test]
fn criterion_1_closed_form_reproduction() {
    let started = Instant::now();
    let out = Process::new(env!("CARGO_BIN_EXE_bergman"))
        .args(["norm", "--n", "1", "--N", "1", "--alpha", "0"])
        .output()
        .unwrap();
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let tilde = report["rows"]
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["label"] == "tilde")
        .unwrap()["estimate"]
        .as_f64()
        .unwrap();
    let cli_err = rel(tilde, 8.0 / PI);
    let mut family_err: f64 = 0.0;
    for n in 1..=4 {
        for alpha in [0.0, 1.0, 2.5] {
            let p = Params::new(n, 1, alpha).unwrap();
            let a = n as f64 + alpha;
            let expected = (ln_gamma(a + 2.0) - 2.0 * ln_gamma((a + 2.0) / 2.0)).exp();
            family_err = family_err.max(rel(tilde_norm_closed(&p).unwrap(), expected));
        }
    }
    let ok = out.status.success() && cli_err <= 1e-9 && family_err <= 1e-10;
    verdict(
        "1",
        ok,
        started,
        Duration::from_secs(1),
        format!("cli tilde = {tilde} (rel err {cli_err:.1e}), N=1 family max rel err {family_err:.1e}"),
    );
}

#[test]
fn criterion_2a_gauss_identity_coherence() {
    let started = Instant::now();
    let worst = grid()
        .iter()
        .map(|p| rel(m_function(p, 1.0).unwrap(), tilde_norm_closed(p).unwrap()))
        .fold(0.0, f64::max);
    verdict(
        "2a",
        worst <= 1e-10,
        started,
        Duration::from_secs(10),
        format!("48-point grid, max rel gap between m(1) and the closed form {worst:.1e}"),
    );
}

#[test]
fn criterion_2b_series_near_one() {
    let started = Instant::now();
    let x = 1.0 - 1e-4;
    let mut worst = (0.0, None);
    for p in grid() {
        let a = p.lambda();
        let c = p.kernel_exponent();
        let series = hyp2f1(&HypParams::new(a, a, c, x), 1e-12).unwrap().value;
        let gauss = hyp2f1_at_one(a, a, c).unwrap();
        let oracle = gamma(c) * gamma(c - 2.0 * a) / (gamma(c - a) * gamma(c - a));
        assert!(rel(gauss, oracle) < 1e-10);
        let gap = (gauss - series).abs();
        if gap > worst.0 {
            worst = (gap, Some(p));
        }
    }
    let (gap, at) = worst;
    let at = at.map(|p| format!("(n, N, alpha) = ({}, {}, {})", p.n(), p.order(), p.alpha()));
    verdict(
        "2b",
        gap <= 1e-3,
        started,
        Duration::from_secs(10),
        format!("max |2F1(1) - 2F1(1 - 1e-4)| = {gap:.4} at {}", at.unwrap_or_default()),
    );
}

fn monomial_config(n: usize, alpha: f64, workers: usize) -> (Params, MCConfig) {
    (Params::new(n, 1, alpha).unwrap(), MCConfig::new(1_000_000, 7).with_workers(workers))
}

/// `∫_B |z^m| dv_α = Γ(n+α+1) Π Γ(mᵢ/2+1) / Γ(n+|m|/2+α+1)`.
fn monomial_oracle(entries: &[u32], n: usize, alpha: f64) -> f64 {
    let half: f64 = entries.iter().map(|&k| k as f64 / 2.0).sum();
    let parts: f64 = entries.iter().map(|&k| ln_gamma(k as f64 / 2.0 + 1.0)).sum();
    (ln_gamma(n as f64 + alpha + 1.0) + parts - ln_gamma(n as f64 + half + alpha + 1.0)).exp()
}

#[test]
fn criterion_3_monomial_integrals() {
    let started = Instant::now();
    let (mut rows, mut failures, mut worst) = (0, 0, 0.0_f64);
    for n in 1..=3 {
        for alpha in [0.0, 1.0, 2.5] {
            let (p, cfg) = monomial_config(n, alpha, 1);
            for row in lemma6_suite(&p, 4, &cfg).unwrap() {
                let oracle = monomial_oracle(row.m.entries(), n, alpha);
                assert!(rel(row.closed_form, oracle) < 1e-12, "closed form at {:?}", row.m);
                rows += 1;
                worst = worst.max(row.rel_error());
                if !(row.sigma_ok(SIGMA) && row.rel_error() <= 0.01) {
                    failures += 1;
                }
            }
        }
    }
    verdict(
        "3",
        failures == 0,
        started,
        Duration::from_secs(120),
        format!("{rows} multi-indices, {failures} outside 4 sigma or 1%, max rel err {worst:.2e}"),
    );
}

fn sweep_config(n: usize, workers: usize) -> (Params, MCConfig) {
    (Params::new(n, 1, 0.0).unwrap(), MCConfig::new(2_000_000, 3).with_workers(workers))
}

#[test]
fn criterion_4_extremal_sweep() {
    for n in [1, 2] {
        let started = Instant::now();
        let (p, cfg) = sweep_config(n, 1);
        let row = extremal_sweep(&p, &[0.999], None, &cfg).unwrap().remove(0);
        let target = tilde_norm_closed(&p).unwrap();
        let est = row.estimate.value.re;
        let ok = est >= 0.95 * target && est <= target + SIGMA * row.estimate.stderr;
        verdict(
            &format!("4 (n = {n})"),
            ok,
            started,
            Duration::from_secs(60),
            format!(
                "r = 0.999 estimate {est:.5} +- {:.1e}, ratio {:.4} to {target:.5}",
                row.estimate.stderr,
                est / target
            ),
        );
    }
}

const FIRST_TERM_CASES: [(usize, u32, f64); 3] = [(1, 1, 0.0), (1, 2, 0.0), (2, 2, 1.0)];

fn first_term_config(n: usize, order: u32, alpha: f64, workers: usize) -> (Params, MCConfig) {
    (Params::new(n, order, alpha).unwrap(), MCConfig::new(1_000_000, 5).with_workers(workers))
}

#[test]
fn criterion_5_first_term_adjudication() {
    let started = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for (n, order, alpha) in FIRST_TERM_CASES {
        let (p, cfg) = first_term_config(n, order, alpha, 1);
        let est = low_order_integral_estimate(&p, &cfg).unwrap();
        let (big_n, n_f) = (order as f64, n as f64);
        let derived = (ln_gamma(big_n + n_f + alpha) + ln_gamma((big_n + 1.0) / 2.0)
            - ln_gamma((big_n + 1.0) / 2.0 + n_f + alpha))
            .exp();
        let as_stated = derived * (big_n + n_f + alpha);
        let gap = (est.value.re - derived).abs();
        // a constant integrand has zero spread, leaving only rounding
        let band = SIGMA * est.stderr + 1e-12 * derived;
        let matches = gap <= band;
        let excludes = (est.value.re - as_stated).abs() > band;
        let library = rel(bloch_first_term(&p, false).unwrap(), derived) < 1e-10
            && rel(bloch_first_term(&p, true).unwrap(), as_stated) < 1e-10;
        ok &= matches && excludes && library;
        detail.push(format!(
            "({n},{order},{alpha}): {:.5} vs derived {derived:.5}, as-stated {as_stated:.5}",
            est.value.re
        ));
    }
    verdict("5", ok, started, Duration::from_secs(60), detail.join("; "));
}

fn besov_config(workers: usize) -> (Params, MCConfig) {
    (Params::new(1, 1, 0.0).unwrap(), MCConfig::new(1_000_000, 9).with_workers(workers))
}

const BESOV_P: [f64; 4] = [2.0, 10.0, 50.0, 200.0];

#[test]
fn criterion_6_besov_limit() {
    let started = Instant::now();
    let (p, cfg) = besov_config(1);
    let table = besov_limit_check(&p, first_axis_power_derivatives(&p, 1), &BESOV_P, &cfg).unwrap();
    let mut ok = true;
    let mut detail = Vec::new();
    for row in &table.rows {
        let est = row.estimate;
        let expected = (est.p - 1.0).powf(-1.0 / est.p);
        ok &= rel(est.value, expected) <= 0.005;
        detail.push(format!("p={}: {:.5} vs {expected:.5}", est.p, est.value));
    }
    let last = table.rows.iter().find(|r| r.estimate.p == 200.0).unwrap().estimate.value;
    ok &= (last - 1.0).abs() < 0.03;
    verdict("6", ok, started, Duration::from_secs(60), detail.join("; "));
}

#[test]
fn criterion_7_identity_suites() {
    let started = Instant::now();
    let mut cfg = RunConfig::new(Command::IdentitySuite, Params::new(1, 1, 0.0).unwrap());
    cfg.mc.seed = 2024;
    let report = run(&cfg).unwrap();
    let tolerances_ok = report
        .rows
        .iter()
        .all(|r| r.target == if r.label.contains("finite differences") { 1e-6 } else { 1e-10 });
    let summary: Vec<String> = report.rows.iter().map(|r| format!("{} {:.1e}", r.label, r.estimate)).collect();
    verdict(
        "7",
        report.passed() && report.rows.len() == 6 && tolerances_ok,
        started,
        Duration::from_secs(10),
        summary.join("; "),
    );
}

#[test]
fn criterion_8_determinism_across_workers() {
    let started = Instant::now();
    let mut mismatches = Vec::new();
    let mut compared = 0;
    for workers in [2, 3] {
        for n in 1..=3 {
            for alpha in [0.0, 1.0, 2.5] {
                let (p, base) = monomial_config(n, alpha, 1);
                let (_, other) = monomial_config(n, alpha, workers);
                let a = lemma6_suite(&p, 4, &base).unwrap();
                let b = lemma6_suite(&p, 4, &other).unwrap();
                compared += a.len();
                if !a.iter().zip(&b).all(|(x, y)| same_bits(&x.estimate, &y.estimate)) {
                    mismatches.push(format!("criterion 3 ({n},{alpha}) with {workers} workers"));
                }
            }
        }
        for n in [1, 2] {
            let (p, base) = sweep_config(n, 1);
            let (_, other) = sweep_config(n, workers);
            let a = extremal_sweep(&p, &[0.999], None, &base).unwrap();
            let b = extremal_sweep(&p, &[0.999], None, &other).unwrap();
            compared += 1;
            if !same_bits(&a[0].estimate, &b[0].estimate) {
                mismatches.push(format!("criterion 4 (n = {n}) with {workers} workers"));
            }
        }
        for (n, order, alpha) in FIRST_TERM_CASES {
            let (p, base) = first_term_config(n, order, alpha, 1);
            let (_, other) = first_term_config(n, order, alpha, workers);
            compared += 1;
            let same = same_bits(
                &low_order_integral_estimate(&p, &base).unwrap(),
                &low_order_integral_estimate(&p, &other).unwrap(),
            );
            if !same {
                mismatches.push(format!("criterion 5 ({n},{order},{alpha}) with {workers} workers"));
            }
        }
        let (p, base) = besov_config(1);
        let (_, other) = besov_config(workers);
        let a = besov_limit_check(&p, first_axis_power_derivatives(&p, 1), &BESOV_P, &base).unwrap();
        let b = besov_limit_check(&p, first_axis_power_derivatives(&p, 1), &BESOV_P, &other).unwrap();
        compared += a.rows.len();
        let same = a.rows.iter().zip(&b.rows).all(|(x, y)| {
            x.estimate.value.to_bits() == y.estimate.value.to_bits() && same_bits(&x.estimate.integral, &y.estimate.integral)
        });
        if !same {
            mismatches.push(format!("criterion 6 with {workers} workers"));
        }
    }
    verdict(
        "8",
        mismatches.is_empty(),
        started,
        Duration::from_secs(600),
        format!("{compared} estimates compared against 1 worker, mismatches: {mismatches:?}"),
    );
}
