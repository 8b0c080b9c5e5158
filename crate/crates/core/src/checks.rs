//! Seeded identity and finite-difference suites for the geometry and the
//! kernel.

use num_complex::Complex64;
use serde::Serialize;

use crate::ballgeom::{align_unitary, involution, involution_vec, jacobian_real, BallPoint, CVector};
use crate::bergman::{kernel, kernel_deriv};
use crate::error::Result;
use crate::integrate::{sample_ball, stream, Params};
use crate::multi_index::MultiIndex;

pub const IDENTITY_TOL: f64 = 1e-10;
pub const FD_REL_TOL: f64 = 1e-6;
const JACOBIAN_STEP: f64 = 1e-5;
const KERNEL_STEP: f64 = 1e-4;
/// Points fed to finite differences lie in the shell `FD_INNER ≤ |p| ≤ FD_OUTER`.
const FD_INNER: f64 = 0.3;
const FD_OUTER: f64 = 0.6;

/// Outcome of one check over its seeded random cases.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(name: &str, errors: &[f64], tolerance: f64) -> Self {
        let max_error = errors.iter().copied().fold(0.0, f64::max);
        Self {
            name: name.to_string(),
            cases: errors.len(),
            max_error,
            tolerance,
            passed: errors.iter().all(|e| *e <= tolerance),
        }
    }
}

/// `∂^m f(z)` of a holomorphic `f` by iterated central differences along
/// the real coordinate axes.
pub fn holomorphic_derivative_fd<F>(f: F, z: &CVector, m: &MultiIndex, h: f64) -> Complex64
where
    F: Fn(&CVector) -> Complex64 + Copy,
{
    fn rec<F: Fn(&CVector) -> Complex64 + Copy>(f: F, z: &CVector, rest: &mut Vec<u32>, h: f64) -> Complex64 {
        let Some(j) = rest.iter().position(|&k| k > 0) else {
            return f(z);
        };
        rest[j] -= 1;
        let step = &CVector::basis(z.dim(), j) * h;
        let up = rec(f, &(z + &step), rest, h);
        let down = rec(f, &(z - &step), rest, h);
        rest[j] += 1;
        (up - down) / (2.0 * h)
    }
    rec(f, z, &mut m.entries().to_vec(), h)
}

fn determinant(mut a: Vec<Vec<Complex64>>) -> Complex64 {
    let n = a.len();
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .expect("non-empty range");
        if a[pivot][col].norm() == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                let sub = factor * a[col][k];
                a[row][k] -= sub;
            }
        }
    }
    det
}

/// `(s)_{|m|} |w|^{|m|} |1 − ⟨z, w⟩|^{−s−|m|}`: the size of `∂^m K_α(z, w)`
/// with `conj(w)^m` replaced by its largest value on the sphere of radius `|w|`.
pub(crate) fn derivative_scale(params: &Params, m: &MultiIndex, z: &BallPoint, w: &BallPoint) -> Result<f64> {
    let k = m.order();
    let q = (Complex64::new(1.0, 0.0) - z.vector().dot(w.vector())).norm();
    Ok(params.derivative_factor(k)?
        * w.norm_sq().sqrt().powi(k as i32)
        * q.powf(-(params.kernel_exponent() + k as f64)))
}

/// Moves `p` radially into the finite-difference shell.
fn into_shell(p: &BallPoint) -> BallPoint {
    let r = p.norm_sq().sqrt();
    let target = FD_INNER + (FD_OUTER - FD_INNER) * r;
    let scale = if r > 0.0 { target / r } else { 0.0 };
    BallPoint::new(p.vector().scale_real(scale)).expect("shell lies inside the ball")
}

/// Runs every identity check on `cases` random inputs per dimension
/// `n = 1..=max_dim`, all drawn from `seed`.
pub fn identity_suite(seed: u64, cases: usize, max_dim: usize) -> Result<Vec<IdentityCheck>> {
    let one = Complex64::new(1.0, 0.0);
    let (mut id1, mut id2, mut invol, mut unit, mut jac, mut kern) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for n in 1..=max_dim {
        let mut rng = stream(seed, n as u64);
        for case in 0..cases {
            let a = sample_ball(n, &mut rng);
            let z = sample_ball(n, &mut rng);
            let w = sample_ball(n, &mut rng);
            let (av, zv, wv) = (a.vector(), z.vector(), w.vector());

            // 1 − |φ_a(w)|² = (1 − |a|²)(1 − |w|²)/|1 − ⟨w, a⟩|²
            let pw = involution(&a, &w)?;
            let rhs = (1.0 - a.norm_sq()) * (1.0 - w.norm_sq()) / (one - wv.dot(av)).norm_sqr();
            id1.push(((1.0 - pw.norm_sq()) - rhs).abs());

            // 1 − ⟨φ_a(z), φ_a(w)⟩ = (1 − |a|²)(1 − ⟨z, w⟩)/((1 − ⟨z, a⟩)(1 − ⟨a, w⟩))
            let pz = involution(&a, &z)?;
            let lhs = one - pz.vector().dot(pw.vector());
            let rhs = (1.0 - a.norm_sq()) * (one - zv.dot(wv)) / ((one - zv.dot(av)) * (one - av.dot(wv)));
            id2.push((lhs - rhs).norm());

            let back = involution(&a, &pw)?;
            let drift = back
                .vector()
                .coords()
                .iter()
                .zip(wv.coords())
                .map(|(x, y)| (x - y).norm())
                .fold(0.0, f64::max);
            invol.push(drift);

            let u = align_unitary(zv)?;
            let uz = u.apply(zv)?;
            let uw = u.apply(wv)?;
            let aligned = (uz[0] - Complex64::new(z.norm_sq().sqrt(), 0.0)).norm();
            let preserved = (uz.dot(&uw) - zv.dot(wv)).norm();
            unit.push(u.unitarity_defect().max(aligned).max(preserved));

            // |det ∂φ_a/∂w|² equals the real Jacobian
            let (a_fd, w_fd) = (into_shell(&a), into_shell(&w));
            let columns: Vec<Vec<Complex64>> = (0..n)
                .map(|j| {
                    let step = &CVector::basis(n, j) * JACOBIAN_STEP;
                    let up = involution_vec(a_fd.vector(), &(w_fd.vector() + &step));
                    let down = involution_vec(a_fd.vector(), &(w_fd.vector() - &step));
                    (0..n).map(|i| (up[i] - down[i]) / (2.0 * JACOBIAN_STEP)).collect()
                })
                .collect();
            let rows: Vec<Vec<Complex64>> = (0..n).map(|i| (0..n).map(|j| columns[j][i]).collect()).collect();
            let fd = determinant(rows).norm_sqr();
            let exact = jacobian_real(&a_fd, &w_fd)?;
            jac.push((fd - exact).abs() / exact);

            let alpha = [0.0, 0.5, 1.0, 2.5, -0.5][case % 5];
            let params = Params::new(n, 2, alpha)?;
            let z_fd = into_shell(&z);
            for m in MultiIndex::all_up_to(n, 2) {
                let exact = kernel_deriv(&params, &m, &z_fd, &w_fd)?;
                let fd = holomorphic_derivative_fd(
                    |x| {
                        let x = BallPoint::new(x.clone()).expect("finite-difference stencil stays inside the ball");
                        kernel(&params, &x, &w_fd).expect("dimensions agree")
                    },
                    z_fd.vector(),
                    &m,
                    KERNEL_STEP,
                );
                kern.push((exact - fd).norm() / derivative_scale(&params, &m, &z_fd, &w_fd)?);
            }
        }
    }
    Ok(vec![
        IdentityCheck::new("identity (1): 1 - |phi_a(w)|^2", &id1, IDENTITY_TOL),
        IdentityCheck::new("identity (2): 1 - <phi_a(z), phi_a(w)>", &id2, IDENTITY_TOL),
        IdentityCheck::new("involutivity", &invol, IDENTITY_TOL),
        IdentityCheck::new("unitary alignment", &unit, IDENTITY_TOL),
        IdentityCheck::new("real Jacobian vs finite differences", &jac, FD_REL_TOL),
        IdentityCheck::new("kernel derivative vs finite differences", &kern, FD_REL_TOL),
    ])
}
