//! Operator norms of `P_α` into the Bloch space: closed forms, the radial
//! profile whose supremum realises them, and Monte Carlo routes that
//! reproduce them.
//!
//! Notation: `s = n + 1 + α`, `λ = (n − N + α + 1)/2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ballgeom::{BallPoint, CVector};
use crate::bergman::{extremal_g, extremal_g_delta, project_deriv_many, Centering, TestFunction};
use crate::error::{Error, Result};
use crate::integrate::{
    gamma_derivative_factor, mc_integral_valpha, mc_mean_vec, sample_ball, sample_sphere, stream, MCConfig,
    MCEstimate, Params,
};
use crate::multi_index::MultiIndex;
use crate::specfun::{hyp2f1, hyp2f1_at_one, log_gamma, HypParams};

const PROFILE_TOL: f64 = 1e-13;
/// Ties in the closed-form maximisation over multi-indices.
const ARGMAX_SLACK: f64 = 1e-12;

/// How a [`NormReport`]'s numeric value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Hypergeometric,
    Series,
    ExtremalSweep,
    McSup,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Numeric {
    Estimate(MCEstimate),
    Value(f64),
}

impl Numeric {
    pub fn value(&self) -> f64 {
        match self {
            Numeric::Estimate(e) => e.value.re,
            Numeric::Value(v) => *v,
        }
    }

    pub fn stderr(&self) -> f64 {
        match self {
            Numeric::Estimate(e) => e.stderr,
            Numeric::Value(_) => 0.0,
        }
    }
}

/// Where a supremum estimate was attained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArgMax {
    pub z: CVector,
    pub m: MultiIndex,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct NormMetadata {
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub radii: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub directions: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub argmax: Option<ArgMax>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub params: Params,
    pub closed_form: f64,
    pub numeric: Numeric,
    pub route: Route,
    pub metadata: NormMetadata,
}

/// A low-order companion estimate on a sweep row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowOrderTerm {
    pub estimate: MCEstimate,
    pub target: f64,
}

/// One radius of an extremal sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    pub estimate: MCEstimate,
    pub closed_form_target: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub low_order: Option<LowOrderTerm>,
}

impl SweepRow {
    pub fn ratio(&self) -> f64 {
        self.estimate.value.re / self.closed_form_target
    }
}

fn check_radius(r: f64, allow_one: bool) -> Result<()> {
    let ok = r >= 0.0 && (r < 1.0 || (allow_one && r == 1.0));
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!("radius {r} outside the admissible range")))
    }
}

/// `m(r) = Γ(n+N+α+1)/Γ(n+α+1) · ₂F₁(λ, λ; n+α+1; r²)`, with the Gauss
/// value at `r = 1`.
pub fn m_function(params: &Params, r: f64) -> Result<f64> {
    check_radius(r, true)?;
    let lambda = params.lambda();
    let c = params.kernel_exponent();
    let hyp = if r == 1.0 {
        hyp2f1_at_one(lambda, lambda, c)?
    } else {
        hyp2f1(&HypParams::new(lambda, lambda, c, r * r), PROFILE_TOL)?.value
    };
    Ok(gamma_derivative_factor(params)? * hyp)
}

/// The power series of `m(r)` truncated after `kmax` terms, with
/// coefficients `(λ)_k² / ((n+α+1)_k k!)` built by recurrence.
pub fn m_function_series(params: &Params, r: f64, kmax: usize) -> Result<f64> {
    check_radius(r, false)?;
    if kmax == 0 {
        return Err(Error::Domain("kmax must be at least 1".into()));
    }
    let lambda = params.lambda();
    let c = params.kernel_exponent();
    let x = r * r;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..kmax {
        let kf = k as f64;
        term *= (lambda + kf) * (lambda + kf) / ((c + kf) * (kf + 1.0)) * x;
        if term == 0.0 {
            break;
        }
        sum += term;
    }
    Ok(gamma_derivative_factor(params)? * sum)
}

/// A truncation length for [`m_function_series`] whose geometric tail is
/// below `e^{−40}` relative to the leading terms.
pub fn series_terms_for(r: f64) -> usize {
    if r == 0.0 {
        return 1;
    }
    let rate = -(r * r).ln();
    ((40.0 / rate).ceil() as usize).saturating_add(100)
}

/// `Γ(n+N+α+1) Γ(N) / Γ²((N+n+α+1)/2)`.
pub fn tilde_norm_closed(params: &Params) -> Result<f64> {
    let order = params.order() as f64;
    let top = params.kernel_exponent() + order;
    Ok((log_gamma(top)? + log_gamma(order)? - 2.0 * log_gamma(top / 2.0)?).exp())
}

/// `Γ(|m|+s) / Γ(|m|/2+s) · ∏ Γ(1 + mᵢ/2)`: the bound on `|∂^m P_α g(0)|`
/// for `‖g‖_∞ ≤ 1`, attained by the phase of `w^m`.
pub fn low_order_bound(params: &Params, m: &MultiIndex) -> Result<f64> {
    m.check_dim(params.n())?;
    let s = params.kernel_exponent();
    let k = m.order() as f64;
    let mut ln = log_gamma(s + k)? - log_gamma(s + k / 2.0)?;
    for &mi in m.entries() {
        ln += log_gamma(1.0 + mi as f64 / 2.0)?;
    }
    Ok(ln.exp())
}

/// The maximum of [`low_order_bound`] over `|m| ≤ N − 1` and a maximiser.
///
/// Fails with [`Error::Degenerate`] unless `(N−1, 0, …, 0)` attains it.
pub fn low_order_max(params: &Params) -> Result<(MultiIndex, f64)> {
    let axis = MultiIndex::first_axis(params.n(), params.order() - 1);
    let axis_value = low_order_bound(params, &axis)?;
    for m in MultiIndex::all_up_to(params.n(), params.order() - 1) {
        let v = low_order_bound(params, &m)?;
        if v > axis_value * (1.0 + ARGMAX_SLACK) {
            return Err(Error::Degenerate(format!(
                "multi-index {m} exceeds the first-axis value ({v} > {axis_value})"
            )));
        }
    }
    Ok((axis, axis_value))
}

/// First term of the Bloch norm of `P_α`.
///
/// The default is `Γ(N+n+α) Γ((N+1)/2) / Γ((N+1)/2+n+α)`, the maximum of
/// [`low_order_bound`]; `as_stated` gives the variant with `Γ(n+N+α+1)` in
/// front, which is larger by the factor `N + n + α`.
pub fn bloch_first_term(params: &Params, as_stated: bool) -> Result<f64> {
    let (_, derived) = low_order_max(params)?;
    if !as_stated {
        return Ok(derived);
    }
    let order = params.order() as f64;
    let n_alpha = params.n() as f64 + params.alpha();
    let half = (1.0 + order) / 2.0;
    Ok((log_gamma(n_alpha + order + 1.0)? + log_gamma(half)? - log_gamma(half + n_alpha)?).exp())
}

/// `‖P_α‖` for the full Bloch norm: first term plus the semi-norm.
pub fn bloch_norm_closed(params: &Params, as_stated: bool) -> Result<f64> {
    Ok(bloch_first_term(params, as_stated)? + tilde_norm_closed(params)?)
}

/// `Γ(N+n+α+1)/Γ(n+α+1)`.
pub fn remark7_lower(params: &Params) -> Result<f64> {
    gamma_derivative_factor(params)
}

/// `max_{|ζ|=1} |ζ^m| = ∏ (mᵢ/|m|)^{mᵢ/2}`.
pub fn monomial_sphere_max(m: &MultiIndex) -> Result<f64> {
    let total = m.order();
    if total == 0 {
        return Err(Error::Domain("multi-index must have positive order".into()));
    }
    Ok(m.entries()
        .iter()
        .filter(|&&k| k > 0)
        .map(|&k| (k as f64 / total as f64).powf(k as f64 / 2.0))
        .product())
}

/// `tilde · (Σ_{|m|=N} (max_S |ζ^m|)^p)^{1/p}`; `p = ∞` takes the maximum.
pub fn remark8_bound(params: &Params, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::Domain(format!("p must be at least 1, got {p}")));
    }
    let maxima: Vec<f64> = MultiIndex::all_of_order(params.n(), params.order())
        .iter()
        .map(monomial_sphere_max)
        .collect::<Result<_>>()?;
    let combined = if p.is_infinite() {
        maxima.iter().copied().fold(0.0, f64::max)
    } else {
        maxima.iter().map(|v| v.powf(p)).sum::<f64>().powf(1.0 / p)
    };
    Ok(tilde_norm_closed(params)? * combined)
}

/// The closed form next to `m(1)` evaluated through the Gauss identity.
pub fn tilde_norm_report(params: &Params) -> Result<NormReport> {
    Ok(NormReport {
        params: *params,
        closed_form: tilde_norm_closed(params)?,
        numeric: Numeric::Value(m_function(params, 1.0)?),
        route: Route::Hypergeometric,
        metadata: NormMetadata::default(),
    })
}

/// The closed form next to the truncated series of `m` at radius `r < 1`.
pub fn series_report(params: &Params, r: f64, kmax: usize) -> Result<NormReport> {
    Ok(NormReport {
        params: *params,
        closed_form: tilde_norm_closed(params)?,
        numeric: Numeric::Value(m_function_series(params, r, kmax)?),
        route: Route::Series,
        metadata: NormMetadata {
            radii: vec![r],
            ..NormMetadata::default()
        },
    })
}

/// Seed for row `index` of a sweep driven by `master`.
pub fn row_seed(master: u64, index: usize) -> u64 {
    master.wrapping_add(index as u64)
}

/// `sup (1−|z|²)^N |∂^m P_α g(z)|` over `z = rζ` for `r` in `grid` and `ζ`
/// among `e₁` plus `directions` random unit vectors, and over all `|m| = N`.
pub fn bloch_seminorm_estimate(
    params: &Params,
    g: &TestFunction,
    grid: &[f64],
    directions: usize,
    cfg: &MCConfig,
) -> Result<NormReport> {
    if grid.is_empty() {
        return Err(Error::Domain("radius grid is empty".into()));
    }
    for &r in grid {
        check_radius(r, false)?;
    }
    let n = params.n();
    let mut units = vec![CVector::basis(n, 0)];
    let mut rng = stream(cfg.seed, u64::MAX - 1);
    units.extend((0..directions).map(|_| sample_sphere(n, &mut rng).vector().clone()));
    let indices = MultiIndex::all_of_order(n, params.order());

    let mut best: Option<(MCEstimate, ArgMax)> = None;
    let mut row = 0;
    for &r in grid {
        let weight = (1.0 - r * r).powi(params.order() as i32);
        for u in &units {
            let z = BallPoint::new(u.scale_real(r))?;
            let row_cfg = cfg.with_seed(row_seed(cfg.seed, row));
            row += 1;
            let estimates = project_deriv_many(params, g, &indices, &z, &row_cfg, Centering::Recentred)?;
            for (m, est) in indices.iter().zip(estimates) {
                let scaled = est.modulus_scaled(weight);
                if best.as_ref().is_none_or(|(b, _)| scaled.value.re > b.value.re) {
                    best = Some((
                        scaled,
                        ArgMax {
                            z: z.vector().clone(),
                            m: m.clone(),
                        },
                    ));
                }
            }
        }
    }
    let (numeric, argmax) = best.expect("grid and directions are non-empty");
    Ok(NormReport {
        params: *params,
        closed_form: tilde_norm_closed(params)?,
        numeric: Numeric::Estimate(numeric),
        route: Route::McSup,
        metadata: NormMetadata {
            radii: grid.to_vec(),
            directions: Some(directions),
            argmax: Some(argmax),
            ..NormMetadata::default()
        },
    })
}

/// A Besov semi-norm estimate `β_p` and its propagated standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovValue {
    pub p: f64,
    pub value: f64,
    pub stderr: f64,
    /// The estimate of `β_p^p`.
    pub integral: MCEstimate,
}

/// `β_p(f) = (Σ_{|m|=N} ∫_B (1−|z|²)^{Np} |∂^m f|^p dτ)^{1/p}`.
///
/// `derivs` writes `∂^m f(z)` for the multi-indices of
/// `MultiIndex::all_of_order(n, N)`, in that order. Sampling is uniform in
/// `v`, with the weight `(1−|z|²)^{Np−n−1}`; the variance of that weight is
/// finite only for `Np − n > 1/2`.
pub fn besov_seminorm_estimate<F>(params: &Params, derivs: F, p: f64, cfg: &MCConfig) -> Result<BesovValue>
where
    F: Fn(&BallPoint, &mut [Complex64]) + Sync,
{
    let n = params.n();
    let order = params.order() as f64;
    if !(p >= 1.0 && p * order > n as f64) {
        return Err(Error::Domain(format!("need p >= 1 and pN > n, got p = {p}")));
    }
    let exponent = order * p - n as f64 - 1.0;
    if exponent + 1.0 < 0.5 {
        log::warn!("pN - n = {} < 1/2: the Besov estimator has infinite variance", exponent + 1.0);
    }
    let width = MultiIndex::all_of_order(n, params.order()).len();
    let est = mc_mean_vec(cfg, 1, |rng, out| {
        let z = sample_ball(n, rng);
        let mut d = smallvec::SmallVec::<[Complex64; 8]>::from_elem(Complex64::new(0.0, 0.0), width);
        derivs(&z, &mut d);
        let sum: f64 = d.iter().map(|x| x.norm().powf(p)).sum();
        let weight = if exponent == 0.0 {
            1.0
        } else {
            (1.0 - z.norm_sq()).powf(exponent)
        };
        out[0] = Complex64::new(weight * sum, 0.0);
    })?
    .remove(0);
    let integral = est.value.re.max(0.0);
    let value = integral.powf(1.0 / p);
    // d(I^{1/p}) = I^{1/p − 1} dI / p
    let stderr = if integral > 0.0 {
        value / (p * integral) * est.stderr
    } else {
        0.0
    };
    Ok(BesovValue {
        p,
        value,
        stderr,
        integral: est,
    })
}

/// `sup_z max_{|m|=N} (1−|z|²)^N |∂^m f(z)|` over a deterministic scan:
/// 201 radii in `[0, 1)` times `e₁` and 64 seeded random directions.
pub fn bloch_seminorm_scan<F>(params: &Params, derivs: F, seed: u64) -> Result<f64>
where
    F: Fn(&BallPoint, &mut [Complex64]),
{
    let n = params.n();
    let mut rng = stream(seed, u64::MAX - 2);
    let mut units = vec![CVector::basis(n, 0)];
    units.extend((0..64).map(|_| sample_sphere(n, &mut rng).vector().clone()));
    let width = MultiIndex::all_of_order(n, params.order()).len();
    let mut buf = vec![Complex64::new(0.0, 0.0); width];
    let mut best: f64 = 0.0;
    for i in 0..=200 {
        let r = i as f64 / 201.0;
        let weight = (1.0 - r * r).powi(params.order() as i32);
        for u in &units {
            derivs(&BallPoint::new(u.scale_real(r))?, &mut buf);
            for d in &buf {
                best = best.max(weight * d.norm());
            }
        }
    }
    Ok(best)
}

/// One row of [`besov_limit_check`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BesovRow {
    pub estimate: BesovValue,
    pub bloch_target: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BesovLimitTable {
    pub rows: Vec<BesovRow>,
    pub bloch_target: f64,
    /// `|β_p − target|` is non-increasing in `p` from its largest value on.
    pub eventually_monotone: bool,
}

/// `β_p` for every `p` in `p_list` next to the Bloch semi-norm it tends to.
pub fn besov_limit_check<F>(params: &Params, derivs: F, p_list: &[f64], cfg: &MCConfig) -> Result<BesovLimitTable>
where
    F: Fn(&BallPoint, &mut [Complex64]) + Sync,
{
    if p_list.is_empty() {
        return Err(Error::Domain("p list is empty".into()));
    }
    let target = bloch_seminorm_scan(params, &derivs, cfg.seed)?;
    let mut ps = p_list.to_vec();
    ps.sort_by(f64::total_cmp);
    let rows = ps
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            Ok(BesovRow {
                estimate: besov_seminorm_estimate(params, &derivs, p, &cfg.with_seed(row_seed(cfg.seed, i)))?,
                bloch_target: target,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gaps: Vec<f64> = rows.iter().map(|r| (r.estimate.value - target).abs()).collect();
    Ok(BesovLimitTable {
        eventually_monotone: eventually_monotone(&gaps, &rows),
        rows,
        bloch_target: target,
    })
}

fn eventually_monotone(gaps: &[f64], rows: &[BesovRow]) -> bool {
    let Some(peak) = gaps
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
    else {
        return true;
    };
    // successive gaps may tie within 4 standard errors
    (peak + 1..gaps.len()).all(|i| gaps[i] <= gaps[i - 1] + 4.0 * (rows[i].estimate.stderr + rows[i - 1].estimate.stderr))
}

/// `∂^m z₁^k` for every `|m| = N` in `all_of_order` order.
pub fn first_axis_power_derivatives(params: &Params, k: u32) -> impl Fn(&BallPoint, &mut [Complex64]) + Sync + Send {
    let order = params.order();
    let falling: f64 = if k >= order {
        ((k - order + 1)..=k).map(|j| j as f64).product()
    } else {
        0.0
    };
    move |z: &BallPoint, out: &mut [Complex64]| {
        for x in out.iter_mut() {
            *x = Complex64::new(0.0, 0.0);
        }
        // all_of_order lists (N, 0, …, 0) first
        if falling != 0.0 {
            out[0] = z.vector()[0].powu(k - order) * falling;
        }
    }
}

/// `β_p(z₁^k) = k!/(k−N)! · (n! Γ(Np−n) Γ(q+1) / Γ(Np+q))^{1/p}` with
/// `q = (k−N)p/2`.
pub fn first_axis_power_besov(params: &Params, k: u32, p: f64) -> Result<f64> {
    let order = params.order();
    if k < order {
        return Ok(0.0);
    }
    let n = params.n() as f64;
    let np = order as f64 * p;
    let q = (k - order) as f64 * p / 2.0;
    let falling: f64 = ((k - order + 1)..=k).map(|j| j as f64).product();
    let ln = log_gamma(n + 1.0)? + log_gamma(np - n)? + log_gamma(q + 1.0)? - log_gamma(np + q)?;
    Ok(falling * (ln / p).exp())
}

/// `sup_{0≤r<1} (1−r²)^N k!/(k−N)! r^{k−N}`.
pub fn first_axis_power_bloch(params: &Params, k: u32) -> f64 {
    let order = params.order();
    if k < order {
        return 0.0;
    }
    let falling: f64 = ((k - order + 1)..=k).map(|j| j as f64).product();
    let j = (k - order) as f64 / 2.0;
    let t = j / (order as f64 + j);
    falling * (1.0 - t).powi(order as i32) * t.powf(j)
}

/// `(s)_{N−1} ∫_B |w₁|^{N−1} dv_α`, the value of `|∂^{N−1} P_α g / ∂z₁^{N−1}(0)|`
/// for `g = (w₁/|w₁|)^{N−1}`, by direct Monte Carlo.
pub fn low_order_integral_estimate(params: &Params, cfg: &MCConfig) -> Result<MCEstimate> {
    let k = params.order() - 1;
    let factor = params.derivative_factor(k)?;
    let est = mc_integral_valpha(
        |w| Complex64::new(w.vector()[0].norm().powi(k as i32), 0.0),
        params,
        cfg,
    )?;
    Ok(est.scaled(factor))
}

/// For each `r`: `(1−r²)^N |∂^{(N,0,…,0)} P_α g(r e₁)|` with `g` the extremal
/// phase at `r e₁` (or its `δ`-modification), against the semi-norm. With
/// `delta` set, each row also carries `|∂^{N−1} P_α g / ∂z₁^{N−1}(0)|` against
/// the first term of the Bloch norm.
pub fn extremal_sweep(params: &Params, r_list: &[f64], delta: Option<f64>, cfg: &MCConfig) -> Result<Vec<SweepRow>> {
    if r_list.is_empty() {
        return Err(Error::Domain("radius list is empty".into()));
    }
    let n = params.n();
    let target = tilde_norm_closed(params)?;
    let top = MultiIndex::first_axis(n, params.order());
    let low = MultiIndex::first_axis(n, params.order() - 1);
    let low_target = match delta {
        Some(_) => Some(bloch_first_term(params, false)?),
        None => None,
    };
    r_list
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            check_radius(r, false)?;
            let row_cfg = cfg.with_seed(row_seed(cfg.seed, i));
            let z_r = BallPoint::on_first_axis(n, r)?;
            let g = match delta {
                Some(d) => extremal_g_delta(params, &z_r, d)?,
                None => extremal_g(params, &z_r)?,
            };
            let weight = (1.0 - r * r).powi(params.order() as i32);
            let estimate = project_deriv_many(params, &g, std::slice::from_ref(&top), &z_r, &row_cfg, Centering::Recentred)?
                .remove(0)
                .modulus_scaled(weight);
            let low_order = match low_target {
                Some(t) => {
                    let origin = BallPoint::origin(n);
                    let est = project_deriv_many(params, &g, std::slice::from_ref(&low), &origin, &row_cfg, Centering::Origin)?
                        .remove(0)
                        .modulus_scaled(1.0);
                    Some(LowOrderTerm { estimate: est, target: t })
                }
                None => None,
            };
            Ok(SweepRow {
                r,
                estimate,
                closed_form_target: target,
                low_order,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn params(n: usize, order: u32, alpha: f64) -> Params {
        Params::new(n, order, alpha).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec()).unwrap()
    }

    fn grid() -> impl Iterator<Item = Params> {
        (1..=4usize).flat_map(|n| {
            (1..=4u32).flat_map(move |order| [0.0, 0.5, 1.0, 2.5].into_iter().map(move |a| params(n, order, a)))
        })
    }

    /// `Γ(x)` from the Stirling series at `x + 20` and the recurrence.
    fn gamma_oracle(x: f64) -> f64 {
        let y = x + 20.0;
        let ln = (y - 0.5) * y.ln() - y + 0.5 * (2.0 * PI).ln() + 1.0 / (12.0 * y) - 1.0 / (360.0 * y.powi(3))
            + 1.0 / (1260.0 * y.powi(5))
            - 1.0 / (1680.0 * y.powi(7));
        let shift: f64 = (0..20).map(|k| (x + k as f64).ln()).sum();
        (ln - shift).exp()
    }

    #[test]
    fn m_function_examples() {
        let p = params(1, 1, 0.0);
        assert!(rel(m_function(&p, 1.0).unwrap(), 8.0 / PI) < 1e-12);
        assert!(rel(m_function(&p, 0.0).unwrap(), 2.0) < 1e-14);
        assert!(rel(m_function(&params(1, 2, 0.0), 1.0).unwrap(), 6.0) < 1e-12);
        assert!(rel(m_function(&params(3, 2, 1.5), 0.0).unwrap(), 5.5 * 6.5) < 1e-12);
        assert!(m_function(&p, 1.01).is_err());
        assert!(m_function(&p, -0.1).is_err());
    }

    #[test]
    fn series_examples() {
        let p = params(1, 1, 0.0);
        assert!(rel(m_function_series(&p, 0.0, 1).unwrap(), 2.0) < 1e-15);
        let s = m_function_series(&p, 0.9, 10_000).unwrap();
        assert!(rel(s, m_function(&p, 0.9).unwrap()) < 1e-8);
        // λ = 0 when N = n + α + 1
        let flat = params(1, 2, 0.0);
        assert_eq!(flat.lambda(), 0.0);
        for r in [0.0, 0.5, 0.99] {
            assert!(rel(m_function_series(&flat, r, 50).unwrap(), 6.0) < 1e-13);
            assert!(rel(m_function(&flat, r).unwrap(), 6.0) < 1e-12);
        }
        assert!(m_function_series(&p, 1.0, 10).is_err());
        assert!(m_function_series(&p, 0.5, 0).is_err());
    }

    #[test]
    fn series_matches_hypergeometric_route() {
        for p in grid() {
            for i in 0..=99 {
                let r = 0.01 * i as f64;
                let s = m_function_series(&p, r, series_terms_for(r)).unwrap();
                let h = m_function(&p, r).unwrap();
                assert!(rel(s, h) < 1e-8, "{p:?} r={r}: {s} vs {h}");
            }
        }
    }

    #[test]
    fn gauss_consistency_on_grid() {
        for p in grid() {
            let t = tilde_norm_closed(&p).unwrap();
            let m1 = m_function(&p, 1.0).unwrap();
            assert!(rel(t, m1) < 1e-10, "{p:?}: {t} vs {m1}");
        }
    }

    #[test]
    fn profile_is_monotone() {
        for p in grid() {
            let mut prev = 0.0;
            for i in 0..50 {
                let r = i as f64 / 49.0;
                let v = m_function(&p, r).unwrap();
                assert!(v >= prev * (1.0 - 1e-14), "{p:?} r={r}");
                prev = v;
            }
        }
    }

    #[test]
    fn tilde_examples() {
        assert!(rel(tilde_norm_closed(&params(1, 1, 0.0)).unwrap(), 8.0 / PI) < 1e-12);
        // Γ(5)/Γ(2.5)²
        let want = 24.0 / (0.75 * PI.sqrt()).powi(2);
        assert!(rel(tilde_norm_closed(&params(2, 1, 1.0)).unwrap(), want) < 1e-12);
        // mpmath: 13.5812218105084
        assert!((want - 13.5812218105084).abs() < 1e-12);
    }

    #[test]
    fn tilde_reduces_for_first_order() {
        for n in 1..=4usize {
            for a in [0.0, 0.5, 1.0, 2.5] {
                let x = n as f64 + a + 2.0;
                let want = gamma_oracle(x) / gamma_oracle(x / 2.0).powi(2);
                let got = tilde_norm_closed(&params(n, 1, a)).unwrap();
                assert!(rel(got, want) < 1e-9, "n={n} α={a}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn bloch_examples() {
        let p = params(1, 1, 0.0);
        assert!(rel(bloch_norm_closed(&p, false).unwrap(), 1.0 + 8.0 / PI) < 1e-12);
        assert!(rel(bloch_norm_closed(&p, true).unwrap(), 2.0 + 8.0 / PI) < 1e-12);
        for n in 1..=4usize {
            for a in [0.0, 0.5, 2.5] {
                assert!(rel(bloch_first_term(&params(n, 1, a), false).unwrap(), 1.0) < 1e-12);
            }
        }
    }

    #[test]
    fn stated_and_derived_first_terms_differ_by_a_linear_factor() {
        for p in grid() {
            let factor = p.order() as f64 + p.n() as f64 + p.alpha();
            let d = bloch_first_term(&p, false).unwrap();
            let s = bloch_first_term(&p, true).unwrap();
            assert!(rel(s, factor * d) < 1e-11, "{p:?}");
        }
    }

    #[test]
    fn low_order_maximiser_is_the_first_axis() {
        for p in grid() {
            let (m, _) = low_order_max(&p).unwrap();
            assert_eq!(m, MultiIndex::first_axis(p.n(), p.order() - 1));
        }
    }

    #[test]
    fn derivative_lower_bound_examples() {
        assert!(rel(remark7_lower(&params(1, 1, 0.0)).unwrap(), 2.0) < 1e-14);
        assert!(rel(remark7_lower(&params(2, 2, 0.0)).unwrap(), 12.0) < 1e-13);
        assert!(rel(remark7_lower(&params(3, 1, 1.5)).unwrap(), 5.5) < 1e-13);
        for p in grid() {
            assert!(remark7_lower(&p).unwrap() <= bloch_norm_closed(&p, false).unwrap() + 1e-12);
        }
    }

    #[test]
    fn sphere_maxima() {
        assert!((monomial_sphere_max(&mi(&[3, 0, 0])).unwrap() - 1.0).abs() < 1e-15);
        assert!((monomial_sphere_max(&mi(&[1, 1])).unwrap() - 0.5).abs() < 1e-15);
        let want = 2.0 / 3.0 * (1.0f64 / 3.0).sqrt();
        assert!((monomial_sphere_max(&mi(&[2, 1])).unwrap() - want).abs() < 1e-15);
        assert!(monomial_sphere_max(&mi(&[0, 0])).is_err());

        // grid oracle over |ζ₁|² = t, |ζ₂|² = 1 − t
        for m in [mi(&[1, 1]), mi(&[2, 1]), mi(&[3, 2])] {
            let (a, b) = (m.entries()[0] as f64, m.entries()[1] as f64);
            let best = (0..=100_000)
                .map(|i| {
                    let t = i as f64 / 100_000.0;
                    t.powf(a / 2.0) * (1.0 - t).powf(b / 2.0)
                })
                .fold(0.0, f64::max);
            assert!(rel(monomial_sphere_max(&m).unwrap(), best) < 1e-8, "{m}");
        }
    }

    #[test]
    fn lp_bound_examples() {
        let p = params(2, 1, 0.0);
        assert!(rel(remark8_bound(&p, 2.0).unwrap(), 6.0 * 2f64.sqrt()) < 1e-12);
        assert!(rel(remark8_bound(&params(1, 1, 0.0), 2.0).unwrap(), 8.0 / PI) < 1e-12);
        let p = params(3, 2, 0.5);
        let t = tilde_norm_closed(&p).unwrap();
        assert!(rel(remark8_bound(&p, f64::INFINITY).unwrap(), t) < 1e-14);
        assert!(rel(remark8_bound(&p, 1e4).unwrap(), t) < 1e-3);
        assert!(remark8_bound(&p, 0.5).is_err());
    }

    #[test]
    fn bloch_seminorm_examples() {
        let p = params(1, 1, 0.0);
        let cfg = MCConfig::new(200_000, 12);
        let one = TestFunction::constant(Complex64::new(1.0, 0.0));
        let r = bloch_seminorm_estimate(&p, &one, &[0.0, 0.5, 0.9], 2, &cfg).unwrap();
        assert_eq!(r.numeric.value(), 0.0);

        // P_α w₁ = z₁, so (1−|z|²)|∂f| peaks at z = 0 with value 1
        let p2 = params(2, 1, 0.0);
        let w1 = TestFunction::monomial(MultiIndex::first_axis(2, 1));
        let r = bloch_seminorm_estimate(&p2, &w1, &[0.0, 0.3, 0.6], 3, &cfg).unwrap();
        let best = r.numeric.value();
        assert!((best - 1.0).abs() < 4.0 * r.numeric.stderr() + 1e-3, "{r:?}");
        assert_eq!(r.metadata.argmax.unwrap().z.norm(), 0.0);
        assert!(bloch_seminorm_estimate(&p, &one, &[1.0], 0, &cfg).is_err());
    }

    #[test]
    fn besov_examples() {
        let p = params(1, 1, 0.0);
        let cfg = MCConfig::new(1_000_000, 61);
        let derivs = first_axis_power_derivatives(&p, 1);
        for (pp, want) in [(2.0, 1.0), (3.0, 0.5f64.powf(1.0 / 3.0)), (200.0, (1.0f64 / 199.0).powf(1.0 / 200.0))] {
            assert!(rel(first_axis_power_besov(&p, 1, pp).unwrap(), want) < 1e-12);
            let est = besov_seminorm_estimate(&p, &derivs, pp, &cfg).unwrap();
            assert!(rel(est.value, want) < 0.005, "p={pp}: {est:?}");
            assert!((est.value - want).abs() <= 4.0 * est.stderr + 1e-12, "p={pp}: {est:?}");
        }
        assert!(besov_seminorm_estimate(&p, &derivs, 1.0, &cfg).is_err());
    }

    #[test]
    fn besov_closed_form_matches_radial_quadrature() {
        use crate::integrate::adaptive_gauss_legendre;
        use crate::integrate::QuadConfig;
        // n = 1: β_p^p = 2∫₀¹ r (1−r²)^{Np−2} |k!/(k−N)! r^{k−N}|^p dr
        for &(order, k, pp) in &[(1u32, 1u32, 2.5), (1, 3, 2.0), (2, 2, 1.5), (2, 4, 3.0)] {
            let p = params(1, order, 0.0);
            let falling: f64 = ((k - order + 1)..=k).map(|j| j as f64).product();
            let e = order as f64 * pp - 2.0;
            let quad = adaptive_gauss_legendre(
                |r| 2.0 * r * (1.0 - r * r).powf(e) * (falling * r.powi((k - order) as i32)).powf(pp),
                0.0,
                1.0,
                &QuadConfig::default(),
            )
            .unwrap()
            .value
            .powf(1.0 / pp);
            assert!(rel(first_axis_power_besov(&p, k, pp).unwrap(), quad) < 1e-8, "N={order} k={k} p={pp}");
        }
    }

    #[test]
    fn besov_limit_examples() {
        let cfg = MCConfig::new(200_000, 4);
        let p = params(1, 1, 0.0);
        let t = besov_limit_check(&p, first_axis_power_derivatives(&p, 1), &[2.0, 10.0, 50.0, 200.0], &cfg).unwrap();
        assert!((t.bloch_target - 1.0).abs() < 1e-12);
        assert!(t.eventually_monotone);
        assert!((t.rows.last().unwrap().estimate.value - 1.0).abs() < 0.03);

        let constant = |_: &BallPoint, out: &mut [Complex64]| out[0] = Complex64::new(0.0, 0.0);
        let t = besov_limit_check(&p, constant, &[2.0, 10.0], &cfg).unwrap();
        assert!(t.rows.iter().all(|r| r.estimate.value == 0.0) && t.bloch_target == 0.0);

        let p2 = params(1, 2, 0.0);
        let t = besov_limit_check(&p2, first_axis_power_derivatives(&p2, 2), &[2.0, 20.0], &cfg).unwrap();
        assert!((t.bloch_target - 2.0).abs() < 1e-12);
        assert!((first_axis_power_bloch(&p2, 2) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn power_bloch_matches_scan() {
        for &(n, order, k) in &[(1usize, 1u32, 3u32), (2, 1, 4), (1, 2, 5), (3, 2, 2)] {
            let p = params(n, order, 0.0);
            let scan = bloch_seminorm_scan(&p, first_axis_power_derivatives(&p, k), 0).unwrap();
            let closed = first_axis_power_bloch(&p, k);
            assert!(scan <= closed * (1.0 + 1e-12) && scan >= closed * 0.999, "{scan} vs {closed}");
        }
    }

    #[test]
    fn low_order_integral_matches_derived_term() {
        for &(n, order, a) in &[(1usize, 1u32, 0.0), (1, 2, 0.0), (2, 2, 1.0)] {
            let p = params(n, order, a);
            let est = low_order_integral_estimate(&p, &MCConfig::new(500_000, 30)).unwrap();
            let derived = bloch_first_term(&p, false).unwrap();
            assert!(est.within_sigma(Complex64::new(derived, 0.0), 4.0), "{p:?} {est:?} vs {derived}");
        }
    }

    #[test]
    fn sweep_rows() {
        let p = params(1, 1, 0.0);
        let cfg = MCConfig::new(400_000, 77);
        let rows = extremal_sweep(&p, &[0.0, 0.9, 0.99], None, &cfg).unwrap();
        assert_eq!(rows[0].estimate.value.re, 0.0);
        let tilde = tilde_norm_closed(&p).unwrap();
        for row in &rows {
            assert!(row.estimate.value.re <= tilde + 4.0 * row.estimate.stderr);
        }
        assert!(rows[2].ratio() > 0.9);
        assert!(rows[1].estimate.value.re < m_function(&p, 0.9).unwrap());
        assert!(extremal_sweep(&p, &[1.0], None, &cfg).is_err());
    }

    #[test]
    fn sweep_with_cutoff_reports_the_low_order_term() {
        let p = params(1, 1, 0.0);
        let rows = extremal_sweep(&p, &[0.999], Some(0.99), &MCConfig::new(400_000, 5)).unwrap();
        let low = rows[0].low_order.unwrap();
        assert_eq!(low.target, 1.0);
        assert!((low.estimate.value.re - 1.0).abs() < 0.05, "{low:?}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn profile_is_bounded_by_its_boundary_value(
            n in 1usize..5, order in 1u32..5, alpha in -0.9f64..4.0, r in 0.0f64..0.999,
        ) {
            let p = params(n, order, alpha);
            let v = m_function(&p, r).unwrap();
            let top = tilde_norm_closed(&p).unwrap();
            prop_assert!(v <= top * (1.0 + 1e-10));
            prop_assert!(v >= m_function(&p, 0.0).unwrap() * (1.0 - 1e-12) || p.lambda() == 0.0);
        }

        #[test]
        fn lower_bound_never_exceeds_bloch_norm(n in 1usize..6, order in 1u32..6, alpha in -0.9f64..5.0) {
            let p = params(n, order, alpha);
            prop_assert!(remark7_lower(&p).unwrap() <= bloch_norm_closed(&p, false).unwrap() + 1e-12);
        }
    }
}
