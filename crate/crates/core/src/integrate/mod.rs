//! Measures on the ball and sphere and the integrators built on them.
//!
//! * `v` is normalized Lebesgue measure on `B` (`v(B) = 1`);
//! * `v_α = c_α (1 − |z|²)^α v` is its weighted version, also a probability;
//! * `σ` is the normalized surface measure on `S`;
//! * `τ = v / (1 − |z|²)^{n+1}` is the Möbius-invariant measure.

mod mc;
mod monomial;
mod quadrature;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{gamma_ratio, log_gamma, pochhammer};

pub use mc::{
    mc_integral_sphere, mc_integral_valpha, mc_integral_valpha_recentred, mc_integral_valpha_vec,
    mc_integral_valpha_vec_recentred, mc_mean_vec, recentring_weight, sample_ball, sample_sphere,
    sample_valpha, stream, MCConfig, MCEstimate, RadialScheme, Stream, CHUNK_SAMPLES,
    MIN_REPORTED_SAMPLES,
};
pub use monomial::{ball_monomial_integral, lemma6_suite, sphere_monomial_integral, Lemma6Row};
pub use quadrature::{adaptive_gauss_legendre, polar_integral, QuadConfig, QuadResult};

/// The triple `(n, N, α)`: complex dimension, derivative order and weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct Params {
    n: usize,
    order: u32,
    alpha: f64,
    c_alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    n: usize,
    #[serde(rename = "N")]
    order: u32,
    alpha: f64,
}

impl TryFrom<RawParams> for Params {
    type Error = Error;
    fn try_from(r: RawParams) -> Result<Self> {
        Params::new(r.n, r.order, r.alpha)
    }
}

impl From<Params> for RawParams {
    fn from(p: Params) -> Self {
        RawParams {
            n: p.n,
            order: p.order,
            alpha: p.alpha,
        }
    }
}

impl Params {
    pub fn new(n: usize, order: u32, alpha: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Domain("dimension n must be >= 1".into()));
        }
        if order == 0 {
            return Err(Error::Domain("derivative order N must be >= 1".into()));
        }
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("weight alpha must be > -1, got {alpha}")));
        }
        // c_α = Γ(n + α + 1) / (n! Γ(α + 1))
        let ln_c = log_gamma(n as f64 + alpha + 1.0)?
            - log_gamma(n as f64 + 1.0)?
            - log_gamma(alpha + 1.0)?;
        let c_alpha = ln_c.exp();
        if !(c_alpha > 0.0 && c_alpha.is_finite()) {
            return Err(Error::Range(format!("c_alpha overflows for n={n}, alpha={alpha}")));
        }
        Ok(Self {
            n,
            order,
            alpha,
            c_alpha,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// The derivative order `N`.
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn c_alpha(&self) -> f64 {
        self.c_alpha
    }

    /// `λ = (n − N + α + 1)/2`.
    pub fn lambda(&self) -> f64 {
        (self.n as f64 - self.order as f64 + self.alpha + 1.0) / 2.0
    }

    /// Kernel exponent `n + 1 + α`.
    pub fn kernel_exponent(&self) -> f64 {
        self.n as f64 + 1.0 + self.alpha
    }

    /// `Γ(n + 1 + α + k) / Γ(n + 1 + α)`, the factor produced by `k`
    /// holomorphic derivatives of the kernel.
    pub fn derivative_factor(&self, k: u32) -> Result<f64> {
        pochhammer(self.kernel_exponent(), k as u64)
    }

    /// Same parameters with a different derivative order.
    pub fn with_order(&self, order: u32) -> Result<Self> {
        Self::new(self.n, order, self.alpha)
    }
}

/// `Γ(n + N + α + 1) / Γ(n + α + 1)` through log-gamma, used where a closed
/// form is wanted independently of the Pochhammer product.
pub(crate) fn gamma_derivative_factor(p: &Params) -> Result<f64> {
    gamma_ratio(p.kernel_exponent() + p.order as f64, p.kernel_exponent())
}
