//! The weighted Bergman kernel `K_α(z, w) = (1 − ⟨z, w⟩)^{−(n+1+α)}`, its
//! holomorphic derivatives, Monte Carlo evaluation of `P_α g` and of its
//! derivatives, and the unimodular test functions used to saturate the
//! operator norms.
//!
//! Complex powers are taken on the principal branch: `Re(1 − ⟨z, w⟩) > 0`
//! for `z, w ∈ B`, so `exp(−s · log(1 − ⟨z, w⟩))` is continuous there.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ballgeom::{BallPoint, CVector};
use crate::error::{Error, Result};
use crate::integrate::{
    mc_integral_valpha_vec, mc_integral_valpha_vec_recentred, sample_ball, stream, MCConfig,
    MCEstimate, Params,
};
use crate::multi_index::MultiIndex;

/// Points drawn by [`TestFunction::spot_check`] before each projection.
const SPOT_CHECK_POINTS: usize = 256;
const SUP_SLACK: f64 = 1e-12;

type Evaluator = dyn Fn(&BallPoint) -> Complex64 + Send + Sync;

/// A bounded function on the ball with a declared bound on its modulus.
#[derive(Clone)]
pub struct TestFunction {
    eval: Arc<Evaluator>,
    sup_bound: f64,
    constant: Option<Complex64>,
    label: String,
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TestFunction")
            .field("label", &self.label)
            .field("sup_bound", &self.sup_bound)
            .finish()
    }
}

impl TestFunction {
    pub fn new<F>(label: impl Into<String>, sup_bound: f64, eval: F) -> Self
    where
        F: Fn(&BallPoint) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            eval: Arc::new(eval),
            sup_bound,
            constant: None,
            label: label.into(),
        }
    }

    /// The constant function `c`. Projections of constants are returned
    /// exactly, without sampling.
    pub fn constant(c: Complex64) -> Self {
        Self {
            eval: Arc::new(move |_| c),
            sup_bound: c.norm(),
            constant: Some(c),
            label: format!("constant {c}"),
        }
    }

    /// `w ↦ w^m`.
    pub fn monomial(m: MultiIndex) -> Self {
        let label = format!("w^{m}");
        Self::new(label, 1.0, move |w| w.vector().monomial(m.entries()))
    }

    /// `w ↦ conj(w)^m`.
    pub fn conj_monomial(m: MultiIndex) -> Self {
        let label = format!("conj(w)^{m}");
        Self::new(label, 1.0, move |w| w.vector().conj_monomial(m.entries()))
    }

    /// `self − other`, bounded by the sum of the two bounds.
    pub fn minus(&self, other: &TestFunction) -> Self {
        let (a, b) = (self.eval.clone(), other.eval.clone());
        Self::new(
            format!("({}) - ({})", self.label, other.label),
            self.sup_bound + other.sup_bound,
            move |w| a(w) - b(w),
        )
    }

    pub fn eval(&self, w: &BallPoint) -> Complex64 {
        (self.eval)(w)
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn as_constant(&self) -> Option<Complex64> {
        self.constant
    }

    /// Checks `|g| ≤ sup_bound` on `points` uniform samples.
    pub fn spot_check(&self, n: usize, points: usize, seed: u64) -> Result<()> {
        if !self.sup_bound.is_finite() || self.sup_bound < 0.0 {
            return Err(Error::Domain(format!(
                "test function {} has no finite sup bound",
                self.label
            )));
        }
        let mut rng = stream(seed, u64::MAX);
        for _ in 0..points {
            let w = sample_ball(n, &mut rng);
            let v = self.eval(&w).norm();
            if !(v <= self.sup_bound + SUP_SLACK) {
                return Err(Error::Domain(format!(
                    "|{}| = {v} exceeds its declared bound {}",
                    self.label, self.sup_bound
                )));
            }
        }
        Ok(())
    }
}

/// How samples are placed for a projection estimate at `z`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Centering {
    /// `w = φ_z(ω)` with `ω ~ v_α`; the kernel's peak at `z` is sampled densely.
    #[default]
    Recentred,
    /// `w ~ v_α` directly.
    Origin,
}

fn one() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// `K_α(z, w)`.
pub fn kernel(params: &Params, z: &BallPoint, w: &BallPoint) -> Result<Complex64> {
    z.vector().check_dim(params.n())?;
    w.vector().check_dim(params.n())?;
    let log_q = (one() - z.vector().dot(w.vector())).ln();
    Ok((-params.kernel_exponent() * log_q).exp())
}

/// `∂^m K_α(z, w) / ∂z^m = (n+1+α)_{|m|} conj(w)^m (1 − ⟨z, w⟩)^{−(n+1+α+|m|)}`
/// for `|m| ≤ N`.
pub fn kernel_deriv(params: &Params, m: &MultiIndex, z: &BallPoint, w: &BallPoint) -> Result<Complex64> {
    check_order(params, m)?;
    z.vector().check_dim(params.n())?;
    w.vector().check_dim(params.n())?;
    let factor = params.derivative_factor(m.order())?;
    let log_q = (one() - z.vector().dot(w.vector())).ln();
    let s = params.kernel_exponent() + m.order() as f64;
    Ok(factor * w.vector().conj_monomial(m.entries()) * (-s * log_q).exp())
}

fn check_order(params: &Params, m: &MultiIndex) -> Result<()> {
    m.check_dim(params.n())?;
    if m.order() > params.order() {
        return Err(Error::Domain(format!(
            "multi-index {m} has order {} above N = {}",
            m.order(),
            params.order()
        )));
    }
    Ok(())
}

fn prepare(params: &Params, g: &TestFunction, z: &BallPoint, cfg: &MCConfig) -> Result<()> {
    z.vector().check_dim(params.n())?;
    cfg.validate()?;
    g.spot_check(params.n(), SPOT_CHECK_POINTS, cfg.seed)
}

fn exact(value: Complex64, cfg: &MCConfig) -> MCEstimate {
    MCEstimate {
        value,
        stderr: 0.0,
        samples: 0,
        seed: cfg.seed,
    }
}

/// `P_α g(z) = ∫_B K_α(z, w) g(w) dv_α(w)` with recentred sampling.
pub fn project(params: &Params, g: &TestFunction, z: &BallPoint, cfg: &MCConfig) -> Result<MCEstimate> {
    project_with(params, g, z, cfg, Centering::default())
}

pub fn project_with(
    params: &Params,
    g: &TestFunction,
    z: &BallPoint,
    cfg: &MCConfig,
    centering: Centering,
) -> Result<MCEstimate> {
    let mut out = project_deriv_many(params, g, &[MultiIndex::zero(params.n())], z, cfg, centering)?;
    Ok(out.remove(0))
}

/// `∂^m P_α g(z)` with recentred sampling, `|m| ≤ N`.
pub fn project_deriv(
    params: &Params,
    g: &TestFunction,
    m: &MultiIndex,
    z: &BallPoint,
    cfg: &MCConfig,
) -> Result<MCEstimate> {
    project_deriv_with(params, g, m, z, cfg, Centering::default())
}

pub fn project_deriv_with(
    params: &Params,
    g: &TestFunction,
    m: &MultiIndex,
    z: &BallPoint,
    cfg: &MCConfig,
    centering: Centering,
) -> Result<MCEstimate> {
    let mut out = project_deriv_many(params, g, std::slice::from_ref(m), z, cfg, centering)?;
    Ok(out.remove(0))
}

/// `∂^m P_α g(z)` for several multi-indices from one shared sample set.
pub fn project_deriv_many(
    params: &Params,
    g: &TestFunction,
    indices: &[MultiIndex],
    z: &BallPoint,
    cfg: &MCConfig,
    centering: Centering,
) -> Result<Vec<MCEstimate>> {
    prepare(params, g, z, cfg)?;
    for m in indices {
        check_order(params, m)?;
    }
    if let Some(c) = g.as_constant() {
        // P_α c = c
        return Ok(indices
            .iter()
            .map(|m| exact(if m.order() == 0 { c } else { Complex64::new(0.0, 0.0) }, cfg))
            .collect());
    }
    let factors: Vec<f64> = indices
        .iter()
        .map(|m| params.derivative_factor(m.order()))
        .collect::<Result<_>>()?;
    let s = params.kernel_exponent();
    let zv: CVector = z.vector().clone();
    let integrand = |w: &BallPoint, out: &mut [Complex64]| {
        let gw = g.eval(w);
        let log_q = (one() - zv.dot(w.vector())).ln();
        for ((slot, m), &factor) in out.iter_mut().zip(indices).zip(&factors) {
            let k = m.order() as f64;
            *slot = factor * w.vector().conj_monomial(m.entries()) * (-(s + k) * log_q).exp() * gw;
        }
    };
    match centering {
        Centering::Recentred => mc_integral_valpha_vec_recentred(indices.len(), integrand, params, z, cfg),
        Centering::Origin => mc_integral_valpha_vec(indices.len(), integrand, params, cfg),
    }
}

/// `arg(1 − ⟨c, w⟩)`, in `(−π/2, π/2)` on the ball.
fn phase(c: &CVector, w: &BallPoint) -> f64 {
    (one() - c.dot(w.vector())).arg()
}

/// `g(w) = (1 − ⟨z_r, w⟩)^{s'} / |1 − ⟨z_r, w⟩|^{s'}` with `s' = n + N + α + 1`:
/// the phase that aligns `∂^{(N,0,…,0)} K_α(z_r, ·)` along `z_r`.
pub fn extremal_g(params: &Params, z_r: &BallPoint) -> Result<TestFunction> {
    z_r.vector().check_dim(params.n())?;
    if z_r.norm_sq() == 0.0 {
        return Ok(TestFunction::constant(one()));
    }
    let exponent = params.kernel_exponent() + params.order() as f64;
    let centre = z_r.vector().clone();
    let label = format!("extremal phase at |z| = {:.6}", centre.norm());
    Ok(TestFunction::new(label, 1.0, move |w| {
        Complex64::from_polar(1.0, exponent * phase(&centre, w))
    }))
}

/// The extremal phase outside `|w| ≥ δ`, the phase `(w₁/|w₁|)^{N−1}` inside
/// `|w| ≤ δ²`, and the radial linear blend of the two between.
pub fn extremal_g_delta(params: &Params, z_r: &BallPoint, delta: f64) -> Result<TestFunction> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta must lie in (0, 1), got {delta}")));
    }
    let outer = extremal_g(params, z_r)?;
    let inner_power = params.order() - 1;
    let inner = move |w: &BallPoint| -> Complex64 {
        if inner_power == 0 {
            return one();
        }
        let w1 = w.vector()[0];
        if w1.norm() == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::from_polar(1.0, inner_power as f64 * w1.arg())
        }
    };
    let inner_radius = delta * delta;
    let label = format!("{} cut at delta = {delta}", outer.label());
    Ok(TestFunction::new(label, 1.0, move |w| {
        let r = w.norm_sq().sqrt();
        if r >= delta {
            outer.eval(w)
        } else if r <= inner_radius {
            inner(w)
        } else {
            let t = (r - inner_radius) / (delta - inner_radius);
            inner(w) * (1.0 - t) + outer.eval(w) * t
        }
    }))
}

/// `g(w) = (1 − ⟨z₀, w⟩)^N / (1 − ⟨w, z₀⟩)^N`.
pub fn remark7_g(z0: &BallPoint, order: u32) -> TestFunction {
    let centre = z0.vector().clone();
    TestFunction::new(format!("conjugate-ratio phase of order {order}"), 1.0, move |w| {
        Complex64::from_polar(1.0, 2.0 * order as f64 * phase(&centre, w))
    })
}
