//! Real special functions: log-gamma, Pochhammer symbols and the Gauss
//! hypergeometric function on `[0, 1]`.

use crate::error::{Error, Result};

/// Largest argument accepted by [`log_gamma`].
pub const LOG_GAMMA_MAX_ARG: f64 = 1e6;

/// Largest index accepted by [`pochhammer`].
pub const POCHHAMMER_MAX_K: u64 = 10_000_000;

/// Default absolute truncation tolerance for [`hyp2f1`].
pub const DEFAULT_HYP_TOL: f64 = 1e-10;

/// Default cap on the number of series terms summed by [`hyp2f1`].
pub const DEFAULT_MAX_TERMS: usize = 10_000_000;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

// Lanczos approximation with g = 671/128, 14 terms.
const LANCZOS_G: f64 = 5.242_187_5;
const LANCZOS_C0: f64 = 0.999_999_999_999_997_1;
const LANCZOS_COEF: [f64; 14] = [
    57.156_235_665_862_92,
    -59.597_960_355_475_49,
    14.136_097_974_741_747,
    -0.491_913_816_097_620_2,
    0.339_946_499_848_118_9e-4,
    0.465_236_289_270_485_76e-4,
    -0.983_744_753_048_795_6e-4,
    0.158_088_703_224_912_5e-3,
    -0.210_264_441_724_104_88e-3,
    0.217_439_618_115_212_64e-3,
    -0.164_318_106_536_763_9e-3,
    0.844_182_239_838_527_4e-4,
    -0.261_908_384_015_814_1e-4,
    0.368_991_826_595_316_2e-5,
];

// ζ(2), ζ(3), ..., ζ(41) for the Taylor series of ln Γ(1 + ε).
const ZETA: [f64; 40] = [
    1.644_934_066_848_226_4,
    1.202_056_903_159_594_3,
    1.082_323_233_711_138_2,
    1.036_927_755_143_370_0,
    1.017_343_061_984_449_1,
    1.008_349_277_381_922_8,
    1.004_077_356_197_944_3,
    1.002_008_392_826_082_2,
    1.000_994_575_127_818_1,
    1.000_494_188_604_119_5,
    1.000_246_086_553_308_0,
    1.000_122_713_347_578_5,
    1.000_061_248_135_058_7,
    1.000_030_588_236_307_0,
    1.000_015_282_259_408_7,
    1.000_007_637_197_637_9,
    1.000_003_817_293_265_0,
    1.000_001_908_212_716_6,
    1.000_000_953_962_033_9,
    1.000_000_476_932_986_8,
    1.000_000_238_450_502_7,
    1.000_000_119_219_926_0,
    1.000_000_059_608_189_1,
    1.000_000_029_803_503_5,
    1.000_000_014_901_554_8,
    1.000_000_007_450_711_8,
    1.000_000_003_725_334_0,
    1.000_000_001_862_659_7,
    1.000_000_000_931_327_4,
    1.000_000_000_465_662_9,
    1.000_000_000_232_831_2,
    1.000_000_000_116_415_5,
    1.000_000_000_058_207_7,
    1.000_000_000_029_103_9,
    1.000_000_000_014_552_0,
    1.000_000_000_007_276_0,
    1.000_000_000_003_638_0,
    1.000_000_000_001_819_0,
    1.000_000_000_000_909_5,
    1.000_000_000_000_454_7,
];

/// `ln Γ(1 + eps)` for `|eps| ≤ 1/4` from the zeta-function Taylor series.
fn ln_gamma_1p_series(eps: f64) -> f64 {
    let mut acc = 0.0;
    // Horner from the highest term down; term k is (-1)^k ζ(k) eps^k / k.
    for (i, z) in ZETA.iter().enumerate().rev() {
        let k = (i + 2) as f64;
        let sign = if (i + 2) % 2 == 0 { 1.0 } else { -1.0 };
        acc = acc * eps + sign * z / k;
    }
    eps * (-EULER_GAMMA + eps * acc)
}

fn ln_gamma_lanczos(x: f64) -> f64 {
    let tmp = x + LANCZOS_G;
    let lead = (x + 0.5) * tmp.ln() - tmp;
    let mut ser = LANCZOS_C0;
    let mut y = x;
    for c in LANCZOS_COEF {
        y += 1.0;
        ser += c / y;
    }
    lead + LN_SQRT_2PI + (ser / x).ln()
}

/// Natural logarithm of the gamma function for `0 < x ≤ 10⁶`.
///
/// Arguments within 1/4 of the zeros at 1 and 2 use a Taylor series so the
/// relative accuracy holds there too; arguments below 1/4 are shifted up by
/// one with the recurrence `ln Γ(x) = ln Γ(x + 1) − ln x`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("log_gamma requires x > 0, got {x}")));
    }
    if x > LOG_GAMMA_MAX_ARG {
        return Err(Error::Domain(format!(
            "log_gamma requires x <= {LOG_GAMMA_MAX_ARG:e}, got {x}"
        )));
    }
    Ok(ln_gamma_pos(x))
}

fn ln_gamma_pos(x: f64) -> f64 {
    if x < 0.25 {
        return ln_gamma_pos(x + 1.0) - x.ln();
    }
    if (x - 1.0).abs() <= 0.25 {
        return ln_gamma_1p_series(x - 1.0);
    }
    if (x - 2.0).abs() <= 0.25 {
        let eps = x - 2.0;
        return ln_gamma_1p_series(eps) + eps.ln_1p();
    }
    ln_gamma_lanczos(x)
}

/// `(ln |Γ(x)|, sign Γ(x))` for any real `x` that is not a pole.
pub(crate) fn ln_gamma_signed(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("gamma of non-finite {x}")));
    }
    if x > 0.0 {
        return Ok((log_gamma(x)?, 1.0));
    }
    if x == x.floor() {
        return Err(Error::Domain(format!("gamma has a pole at {x}")));
    }
    // Reflection: Γ(x) Γ(1 − x) = π / sin(πx).
    let s = (std::f64::consts::PI * x).sin();
    let lg = log_gamma(1.0 - x)?;
    Ok((std::f64::consts::PI.ln() - s.abs().ln() - lg, s.signum()))
}

/// `Γ(num) / Γ(den)` evaluated through log-gamma differences.
pub fn gamma_ratio(num: f64, den: f64) -> Result<f64> {
    let (ln, sn) = ln_gamma_signed(num)?;
    let (ld, sd) = ln_gamma_signed(den)?;
    let v = sn * sd * (ln - ld).exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range(format!("Γ({num})/Γ({den}) overflows")))
    }
}

/// Rising factorial `(a)_k = a (a + 1) ··· (a + k − 1)` by direct product.
pub fn pochhammer(a: f64, k: u64) -> Result<f64> {
    if k > POCHHAMMER_MAX_K {
        return Err(Error::Domain(format!(
            "pochhammer index {k} exceeds {POCHHAMMER_MAX_K}"
        )));
    }
    let mut p = 1.0;
    for j in 0..k {
        p *= a + j as f64;
        if p == 0.0 {
            return Ok(0.0);
        }
        if !p.is_finite() {
            return Err(Error::Range(format!("pochhammer({a}, {k}) overflows")));
        }
    }
    Ok(p)
}

/// Parameters of `₂F₁(a, b; c; x)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HypParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub x: f64,
}

impl HypParams {
    pub fn new(a: f64, b: f64, c: f64, x: f64) -> Self {
        Self { a, b, c, x }
    }
}

/// A summed series together with the number of terms it took.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSum {
    pub value: f64,
    pub terms: usize,
    /// Rigorous bound on the neglected tail (zero for terminating series).
    pub tail_bound: f64,
}

/// `Some(k)` when `v` is the non-positive integer `−k`.
fn non_positive_integer(v: f64) -> Option<u64> {
    (v <= 0.0 && v == v.floor() && v > -(POCHHAMMER_MAX_K as f64)).then(|| (-v) as u64)
}

fn check_c(c: f64) -> Result<()> {
    if !c.is_finite() || non_positive_integer(c).is_some() {
        return Err(Error::Domain(format!(
            "hypergeometric c must not be zero or a negative integer, got {c}"
        )));
    }
    Ok(())
}

fn terminating_sum(a: f64, b: f64, c: f64, x: f64, last: u64) -> SeriesSum {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 0..last {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) * x / ((c + kf) * (1.0 + kf));
        sum += term;
    }
    SeriesSum {
        value: sum,
        terms: last as usize + 1,
        tail_bound: 0.0,
    }
}

/// Degree of the polynomial when `a` or `b` is a non-positive integer.
fn termination(a: f64, b: f64) -> Option<u64> {
    match (non_positive_integer(a), non_positive_integer(b)) {
        (Some(i), Some(j)) => Some(i.min(j)),
        (Some(i), None) | (None, Some(i)) => Some(i),
        (None, None) => None,
    }
}

/// Gauss hypergeometric series `Σ (a)_k (b)_k / (k! (c)_k) x^k` on `[0, 1)`
/// with the default term cap.
pub fn hyp2f1(params: &HypParams, tol: f64) -> Result<SeriesSum> {
    hyp2f1_with_limit(params, tol, DEFAULT_MAX_TERMS)
}

/// [`hyp2f1`] with an explicit term cap.
///
/// Summation stops at the first index `K` where every later term ratio is
/// provably at most `ρ_K ≤ (1 + x)/2`; the tail is then bounded by the
/// geometric series `|t_K| ρ_K / (1 − ρ_K)`, which must be `≤ tol`.
pub fn hyp2f1_with_limit(params: &HypParams, tol: f64, max_terms: usize) -> Result<SeriesSum> {
    let HypParams { a, b, c, x } = *params;
    check_c(c)?;
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain("non-finite hypergeometric parameter".into()));
    }
    if let Some(last) = termination(a, b) {
        if (0.0..=1.0).contains(&x) {
            return Ok(terminating_sum(a, b, c, x, last));
        }
    }
    if !(0.0..1.0).contains(&x) {
        return Err(Error::Domain(format!(
            "hyp2f1 series requires x in [0, 1), got {x}"
        )));
    }

    let rho = 0.5 * (1.0 + x);
    // Past this index all Möbius factors (a+k)/(c+k), (b+k)/(1+k) are positive
    // and monotone in k, hence bounded by max(value at K, 1).
    let positive_from = (-a).max(-b).max(-c).max(0.0);
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut k = 0usize;
    loop {
        let kf = k as f64;
        if kf > positive_from {
            let fa = ((a + kf) / (c + kf)).max(1.0);
            let fb = ((b + kf) / (1.0 + kf)).max(1.0);
            let rho_k = x * fa * fb;
            if rho_k <= rho {
                let tail = if rho_k == 0.0 {
                    0.0
                } else {
                    term.abs() * rho_k / (1.0 - rho_k)
                };
                if tail <= tol {
                    return Ok(SeriesSum {
                        value: sum,
                        terms: k + 1,
                        tail_bound: tail,
                    });
                }
            }
        }
        if k + 1 >= max_terms {
            return Err(Error::NonConvergence {
                what: "hyp2f1 series",
                iterations: k + 1,
                achieved: term.abs(),
            });
        }
        term *= (a + kf) * (b + kf) * x / ((c + kf) * (1.0 + kf));
        sum += term;
        if !sum.is_finite() {
            return Err(Error::Range(format!("hyp2f1{params:?} overflows")));
        }
        k += 1;
    }
}

/// `₂F₁(a, b; c; 1)` by the Gauss summation formula
/// `Γ(c) Γ(c − a − b) / (Γ(c − a) Γ(c − b))`.
///
/// A terminating series (non-positive integer `a` or `b`) is summed exactly.
pub fn hyp2f1_at_one(a: f64, b: f64, c: f64) -> Result<f64> {
    check_c(c)?;
    if let Some(last) = termination(a, b) {
        return Ok(terminating_sum(a, b, c, 1.0, last).value);
    }
    let s = c - a - b;
    if !(s > 0.0) {
        return Err(Error::Domain(format!(
            "₂F₁({a}, {b}; {c}; 1) diverges: c − a − b = {s} ≤ 0"
        )));
    }
    // 1/Γ vanishes at the poles of the denominator.
    if non_positive_integer(c - a).is_some() || non_positive_integer(c - b).is_some() {
        return Ok(0.0);
    }
    let (l1, s1) = ln_gamma_signed(c)?;
    let (l2, s2) = ln_gamma_signed(s)?;
    let (l3, s3) = ln_gamma_signed(c - a)?;
    let (l4, s4) = ln_gamma_signed(c - b)?;
    let v = s1 * s2 * s3 * s4 * (l1 + l2 - l3 - l4).exp();
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Range(format!("₂F₁({a}, {b}; {c}; 1) overflows")))
    }
}
