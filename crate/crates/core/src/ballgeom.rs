//! Hermitian geometry of the unit ball `B ⊂ Cⁿ`.
//!
//! Vectors are stored as `n` complex numbers, which is the same memory layout
//! as `2n` interleaved reals `(re₁, im₁, …, re_n, im_n)`.

use std::ops::{Add, Index, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Tolerance on `| |v| − 1 |` accepted by [`SpherePoint::new`].
pub const SPHERE_TOL: f64 = 1e-12;

/// Below this `|a|²` the involution `φ_a` is treated as `−Id`.
const TINY_NORM_SQ: f64 = 1e-30;

pub(crate) type Coords = SmallVec<[Complex64; 4]>;

/// A vector of `Cⁿ`, `n ≥ 1`, with finite coordinates. Serializes as its
/// `2n` real coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<f64>", try_from = "Vec<f64>")]
pub struct CVector {
    coords: Coords,
}

impl CVector {
    pub fn new(coords: impl IntoIterator<Item = Complex64>) -> Result<Self> {
        let coords: Coords = coords.into_iter().collect();
        if coords.is_empty() {
            return Err(Error::Domain("vector dimension must be >= 1".into()));
        }
        if coords.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Domain("vector coordinates must be finite".into()));
        }
        Ok(Self { coords })
    }

    pub(crate) fn from_coords(coords: Coords) -> Self {
        debug_assert!(!coords.is_empty());
        Self { coords }
    }

    /// Builds a vector from `2n` reals `(re₁, im₁, …, re_n, im_n)`.
    pub fn from_reals(reals: &[f64]) -> Result<Self> {
        if reals.is_empty() || reals.len() % 2 != 0 {
            return Err(Error::Domain(format!(
                "expected an even, non-zero number of reals, got {}",
                reals.len()
            )));
        }
        Self::new(reals.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])))
    }

    /// The real coordinates `(re₁, im₁, …, re_n, im_n)`.
    pub fn to_reals(&self) -> Vec<f64> {
        self.coords.iter().flat_map(|c| [c.re, c.im]).collect()
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_coords(SmallVec::from_elem(Complex64::new(0.0, 0.0), n.max(1)))
    }

    /// The standard basis vector `e_j` (zero-based `j`).
    pub fn basis(n: usize, j: usize) -> Self {
        let mut v = Self::zeros(n);
        v.coords[j] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.coords
    }

    pub fn norm_sq(&self) -> f64 {
        self.coords.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_coords(self.coords.iter().map(|c| c * s).collect())
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self::from_coords(self.coords.iter().map(|c| c * s).collect())
    }

    /// `⟨self, other⟩ = Σ selfᵢ · conj(otherᵢ)`; dimensions must agree.
    pub(crate) fn dot(&self, other: &CVector) -> Complex64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a * b.conj())
            .sum()
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() == n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: n,
                got: self.dim(),
            })
        }
    }

    fn check_same_dim(&self, other: &CVector) -> Result<()> {
        if self.dim() == other.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: other.dim(),
            })
        }
    }

    /// `z^m = ∏ zᵢ^{mᵢ}`.
    pub fn monomial(&self, m: &[u32]) -> Complex64 {
        debug_assert_eq!(m.len(), self.dim());
        self.coords
            .iter()
            .zip(m)
            .fold(Complex64::new(1.0, 0.0), |acc, (z, &k)| acc * z.powu(k))
    }

    /// `conj(z)^m`.
    pub fn conj_monomial(&self, m: &[u32]) -> Complex64 {
        self.monomial(m).conj()
    }
}

impl From<CVector> for Vec<f64> {
    fn from(v: CVector) -> Vec<f64> {
        v.to_reals()
    }
}

impl TryFrom<Vec<f64>> for CVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::from_reals(&v)
    }
}

impl Index<usize> for CVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.coords[i]
    }
}

impl Add for &CVector {
    type Output = CVector;
    fn add(self, rhs: &CVector) -> CVector {
        CVector::from_coords(self.coords.iter().zip(&rhs.coords).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &CVector {
    type Output = CVector;
    fn sub(self, rhs: &CVector) -> CVector {
        CVector::from_coords(self.coords.iter().zip(&rhs.coords).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &CVector {
    type Output = CVector;
    fn neg(self) -> CVector {
        CVector::from_coords(self.coords.iter().map(|a| -a).collect())
    }
}

impl Mul<f64> for &CVector {
    type Output = CVector;
    fn mul(self, rhs: f64) -> CVector {
        self.scale_real(rhs)
    }
}

/// A point of the open unit ball, `|v| < 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CVector", into = "CVector")]
pub struct BallPoint(CVector);

impl BallPoint {
    pub fn new(v: CVector) -> Result<Self> {
        let r2 = v.norm_sq();
        if r2 < 1.0 {
            Ok(Self(v))
        } else {
            Err(Error::Domain(format!(
                "point is not inside the unit ball: |v|² = {r2}"
            )))
        }
    }

    pub(crate) fn new_unchecked(v: CVector) -> Self {
        debug_assert!(v.norm_sq() < 1.0);
        Self(v)
    }

    pub fn origin(n: usize) -> Self {
        Self(CVector::zeros(n))
    }

    /// `r·e₁`; `r` must lie in `[0, 1)`.
    pub fn on_first_axis(n: usize, r: f64) -> Result<Self> {
        Self::new(CVector::basis(n, 0).scale_real(r))
    }

    pub fn from_complex(coords: &[Complex64]) -> Result<Self> {
        Self::new(CVector::new(coords.iter().copied())?)
    }

    pub fn vector(&self) -> &CVector {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn norm_sq(&self) -> f64 {
        self.0.norm_sq()
    }
}

impl TryFrom<CVector> for BallPoint {
    type Error = Error;
    fn try_from(v: CVector) -> Result<Self> {
        Self::new(v)
    }
}

impl From<BallPoint> for CVector {
    fn from(p: BallPoint) -> CVector {
        p.0
    }
}

/// A point of the unit sphere, `| |v| − 1 | ≤ 1e−12`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpherePoint(CVector);

impl SpherePoint {
    pub fn new(v: CVector) -> Result<Self> {
        let r = v.norm();
        if (r - 1.0).abs() <= SPHERE_TOL {
            Ok(Self(v))
        } else {
            Err(Error::Domain(format!("point is not on the unit sphere: |v| = {r}")))
        }
    }

    /// Projects a non-zero vector onto the sphere.
    pub fn normalize(v: &CVector) -> Result<Self> {
        let r = v.norm();
        if !(r > 0.0) {
            return Err(Error::Degenerate("cannot normalize the zero vector".into()));
        }
        Self::new(v.scale_real(1.0 / r))
    }

    pub fn vector(&self) -> &CVector {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

/// Hermitian inner product `⟨z, w⟩ = Σ zᵢ conj(wᵢ)`.
pub fn herm_inner(z: &CVector, w: &CVector) -> Result<Complex64> {
    z.check_same_dim(w)?;
    Ok(z.dot(w))
}

/// Involutive automorphism `φ_a` applied to an arbitrary vector of the
/// closed ball.
pub(crate) fn involution_vec(a: &CVector, w: &CVector) -> CVector {
    let aa = a.norm_sq();
    if aa < TINY_NORM_SQ {
        return -w;
    }
    let wa = w.dot(a);
    let proj = a.scale(wa / aa);
    let orth = w - &proj;
    let s = (1.0 - aa).sqrt();
    let denom = Complex64::new(1.0, 0.0) - wa;
    let num_coords: Coords = a
        .coords
        .iter()
        .zip(&proj.coords)
        .zip(&orth.coords)
        .map(|((ai, pi), qi)| (ai - pi - qi * s) / denom)
        .collect();
    CVector::from_coords(num_coords)
}

/// `φ_a(w) = (a − P_a w − √(1−|a|²) Q_a w) / (1 − ⟨w, a⟩)`, where `P_a` is the
/// orthogonal projection onto `span(a)` and `Q_a = I − P_a`; `φ_0 = −Id`.
pub fn involution(a: &BallPoint, w: &BallPoint) -> Result<BallPoint> {
    a.0.check_same_dim(&w.0)?;
    let out = involution_vec(&a.0, &w.0);
    // |φ_a(w)| < 1 holds exactly; rounding can only touch it for |w| ≈ 1.
    if out.norm_sq() < 1.0 {
        Ok(BallPoint(out))
    } else {
        let s = (1.0 - f64::EPSILON) / out.norm();
        Ok(BallPoint(out.scale_real(s)))
    }
}

/// Real Jacobian of `φ_a` at `w`: `((1 − |a|²)/|1 − ⟨a, w⟩|²)^{n+1}`.
pub fn jacobian_real(a: &BallPoint, w: &BallPoint) -> Result<f64> {
    a.0.check_same_dim(&w.0)?;
    Ok(jacobian_real_vec(&a.0, &w.0))
}

pub(crate) fn jacobian_real_vec(a: &CVector, w: &CVector) -> f64 {
    let n = a.dim() as i32;
    let d = (Complex64::new(1.0, 0.0) - a.dot(w)).norm_sqr();
    ((1.0 - a.norm_sq()) / d).powi(n + 1)
}

/// A unitary map `U` whose first output coordinate is `⟨ξ, z⟩/|z|`.
///
/// Rows are an orthonormal basis `u₁ = z/|z|, u₂, …, u_n` and
/// `(Uξ)ᵢ = ⟨ξ, uᵢ⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    rows: Vec<CVector>,
}

impl Unitary {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[CVector] {
        &self.rows
    }

    pub fn apply(&self, xi: &CVector) -> Result<CVector> {
        xi.check_same_dim(&self.rows[0])?;
        Ok(CVector::from_coords(self.rows.iter().map(|u| xi.dot(u)).collect()))
    }

    /// `U* η = Σ ηᵢ uᵢ`.
    pub fn apply_adjoint(&self, eta: &CVector) -> Result<CVector> {
        eta.check_same_dim(&self.rows[0])?;
        let mut out = CVector::zeros(self.dim());
        for (u, e) in self.rows.iter().zip(eta.coords()) {
            out = &out + &u.scale(*e);
        }
        Ok(out)
    }

    /// `max |(U U*)ᵢⱼ − δᵢⱼ|`.
    pub fn unitarity_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, ui) in self.rows.iter().enumerate() {
            for (j, uj) in self.rows.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((uj.dot(ui) - want).norm());
            }
        }
        worst
    }
}

/// Extends `z/|z|` to an orthonormal basis by Gram–Schmidt over the
/// standard basis `e₁, …, e_n`, in that order.
pub fn align_unitary(z: &CVector) -> Result<Unitary> {
    let r = z.norm();
    if !(r > 0.0) {
        return Err(Error::Degenerate("align_unitary needs a non-zero vector".into()));
    }
    let n = z.dim();
    let mut rows = vec![z.scale_real(1.0 / r)];
    for j in 0..n {
        if rows.len() == n {
            break;
        }
        let mut v = CVector::basis(n, j);
        // two passes of classical Gram–Schmidt
        for _ in 0..2 {
            for u in &rows {
                v = &v - &u.scale(v.dot(u));
            }
        }
        let norm = v.norm();
        if norm > 1e-6 {
            rows.push(v.scale_real(1.0 / norm));
        }
    }
    debug_assert_eq!(rows.len(), n);
    Ok(Unitary { rows })
}
