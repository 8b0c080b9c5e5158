//! Globally adaptive Gauss–Legendre quadrature and the radial integral of
//! `v_α` in polar coordinates.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use super::Params;
use crate::error::{Error, Result};

const LOW_ORDER: usize = 10;
const HIGH_ORDER: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_nodes: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-15,
            max_nodes: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub nodes: usize,
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
fn gauss_legendre(order: usize) -> Vec<(f64, f64)> {
    let n = order;
    let mut rule = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let k = k as f64;
                let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        rule.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    rule
}

type Rule = Vec<(f64, f64)>;

fn rules() -> &'static (Rule, Rule) {
    static RULES: OnceLock<(Rule, Rule)> = OnceLock::new();
    RULES.get_or_init(|| (gauss_legendre(LOW_ORDER), gauss_legendre(HIGH_ORDER)))
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn panel<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let (low, high) = rules();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let apply = |rule: &[(f64, f64)]| -> Result<f64> {
        let mut s = 0.0;
        for &(x, w) in rule {
            let fx = f(mid + half * x);
            if !fx.is_finite() {
                return Err(Error::Domain(format!("integrand is not finite at {}", mid + half * x)));
            }
            s += w * fx;
        }
        Ok(s * half)
    };
    let hi = apply(high)?;
    let lo = apply(low)?;
    Ok(Panel {
        a,
        b,
        value: hi,
        error: (hi - lo).abs(),
    })
}

/// `∫_a^b f` by interval bisection of the panel with the largest error
/// estimate (difference of the 21- and 10-point rules) until the summed
/// estimate drops below `max(abs_tol, rel_tol·|I|)`.
pub fn adaptive_gauss_legendre<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    let per_panel = LOW_ORDER + HIGH_ORDER;
    let mut heap = BinaryHeap::new();
    let first = panel(&f, a, b)?;
    let mut value = first.value;
    let mut error = first.error;
    let mut nodes = per_panel;
    heap.push(first);
    loop {
        if error <= cfg.abs_tol.max(cfg.rel_tol * value.abs()) {
            return Ok(QuadResult { value, error, nodes });
        }
        if nodes + 2 * per_panel > cfg.max_nodes {
            return Err(Error::NonConvergence {
                what: "adaptive Gauss-Legendre quadrature",
                iterations: nodes,
                achieved: error,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::NonConvergence {
                what: "adaptive Gauss-Legendre quadrature (interval underflow)",
                iterations: nodes,
                achieved: error,
            });
        }
        let left = panel(&f, worst.a, mid)?;
        let right = panel(&f, mid, worst.b)?;
        nodes += 2 * per_panel;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // re-sum occasionally so cancellation in the running totals cannot drift
        if nodes % (per_panel * 512) == per_panel {
            value = heap.iter().map(|p| p.value).sum();
            error = heap.iter().map(|p| p.error).sum();
        }
    }
}

/// `c_α · 2n ∫₀¹ r^{2n−1} (1 − r²)^α profile(r) dr`, i.e. the `v_α` integral
/// of a radial function.
///
/// The integral is evaluated in `s = 1 − r²`, where the weight becomes
/// `c_α n (1 − s)^{n−1} s^α`. For `α < 0` the further substitution
/// `s = u^{1/(α+1)}` absorbs the endpoint singularity.
pub fn polar_integral<F: Fn(f64) -> f64>(profile: F, params: &Params) -> Result<QuadResult> {
    polar_integral_with(profile, params, &QuadConfig::default())
}

pub(crate) fn polar_integral_with<F: Fn(f64) -> f64>(
    profile: F,
    params: &Params,
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    let n = params.n() as i32;
    let alpha = params.alpha();
    let scale = params.c_alpha() * params.n() as f64;
    if alpha < 0.0 {
        let inv = 1.0 / (alpha + 1.0);
        let integrand = |u: f64| {
            let s = u.powf(inv);
            let r = (1.0 - s).max(0.0).sqrt();
            scale * inv * (1.0 - s).powi(n - 1) * profile(r)
        };
        return adaptive_gauss_legendre(integrand, 0.0, 1.0, cfg);
    }
    let integrand = |s: f64| {
        let r = (1.0 - s).max(0.0).sqrt();
        let w = if alpha == 0.0 { 1.0 } else { s.powf(alpha) };
        scale * (1.0 - s).powi(n - 1) * w * profile(r)
    };
    adaptive_gauss_legendre(integrand, 0.0, 1.0, cfg)
}
