//! Closed-form integrals of `|z^m|` over the sphere and the ball.

use num_complex::Complex64;
use serde::Serialize;

use super::{mc_integral_valpha_vec, MCConfig, MCEstimate, Params};
use crate::error::Result;
use crate::multi_index::MultiIndex;
use crate::specfun::log_gamma;

fn ln_prod_half_gammas(m: &MultiIndex) -> Result<f64> {
    m.entries()
        .iter()
        .map(|&k| log_gamma(1.0 + k as f64 / 2.0))
        .sum()
}

/// `∫_S |ζ^m| dσ = (n−1)! ∏ Γ(1 + mᵢ/2) / Γ(n + |m|/2)`.
pub fn sphere_monomial_integral(m: &MultiIndex, n: usize) -> Result<f64> {
    m.check_dim(n)?;
    let nf = n as f64;
    let half = m.order() as f64 / 2.0;
    Ok((log_gamma(nf)? + ln_prod_half_gammas(m)? - log_gamma(nf + half)?).exp())
}

/// `∫_B |z^m| dv_α = Γ(1+α+n)/Γ(1+α+n+|m|/2) · ∏ Γ(1 + mᵢ/2)`.
pub fn ball_monomial_integral(m: &MultiIndex, params: &Params) -> Result<f64> {
    m.check_dim(params.n())?;
    let base = 1.0 + params.alpha() + params.n() as f64;
    let half = m.order() as f64 / 2.0;
    Ok((log_gamma(base)? - log_gamma(base + half)? + ln_prod_half_gammas(m)?).exp())
}

/// One multi-index of the monomial-integral cross-check.
#[derive(Debug, Clone, Serialize)]
pub struct Lemma6Row {
    pub m: MultiIndex,
    pub closed_form: f64,
    pub estimate: MCEstimate,
}

impl Lemma6Row {
    pub fn sigma_ok(&self, k: f64) -> bool {
        self.estimate.within_sigma(Complex64::new(self.closed_form, 0.0), k)
    }

    pub fn rel_error(&self) -> f64 {
        (self.estimate.value.re - self.closed_form).abs() / self.closed_form
    }
}

/// Monte Carlo estimates of `∫_B |z^m| dv_α` for every `|m| ≤ max_order`,
/// all from one shared sample set, next to the closed form.
pub fn lemma6_suite(params: &Params, max_order: u32, cfg: &MCConfig) -> Result<Vec<Lemma6Row>> {
    let n = params.n();
    let indices = MultiIndex::all_up_to(n, max_order);
    let est = mc_integral_valpha_vec(
        indices.len(),
        |z, out| {
            // |z^m| = ∏ |zᵢ|^{mᵢ}
            let mods: smallvec::SmallVec<[f64; 4]> = z.vector().coords().iter().map(|c| c.norm()).collect();
            for (slot, m) in out.iter_mut().zip(&indices) {
                let v: f64 = mods.iter().zip(m.entries()).map(|(r, &k)| r.powi(k as i32)).product();
                *slot = Complex64::new(v, 0.0);
            }
        },
        params,
        cfg,
    )?;
    indices
        .into_iter()
        .zip(est)
        .map(|(m, estimate)| {
            Ok(Lemma6Row {
                closed_form: ball_monomial_integral(&m, params)?,
                m,
                estimate,
            })
        })
        .collect()
}
