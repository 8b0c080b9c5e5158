//! Numerical laboratory for the weighted Bergman projection `P_α` from
//! bounded functions on the unit ball of `Cⁿ` onto the Bloch space.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`]: log-gamma, Pochhammer symbols and the Gauss hypergeometric
//!   function `₂F₁` on `[0, 1]`.
//! * [`ballgeom`]: Hermitian geometry of the ball, involutive automorphisms
//!   `φ_a`, their real Jacobian and the unitary alignment map.
//! * [`integrate`]: the measures `v`, `v_α`, `σ`, `τ`, reproducible
//!   Monte Carlo estimators, radial quadrature and closed-form monomial
//!   integrals.
//! * [`bergman`]: the weighted Bergman kernel, its derivatives, the projection
//!   evaluator and the extremal test functions.
//! * [`norms`]: closed-form operator norms and the numerical routes that
//!   reproduce them.
//! * [`checks`]: seeded identity and finite-difference suites.

pub mod ballgeom;
pub mod bergman;
pub mod checks;
mod error;
pub mod integrate;
mod multi_index;
pub mod norms;
pub mod specfun;

pub use ballgeom::{BallPoint, CVector, SpherePoint};
pub use bergman::TestFunction;

pub use error::{Error, Result};
pub use integrate::{MCConfig, MCEstimate, Params, RadialScheme};
pub use multi_index::MultiIndex;
pub use num_complex::Complex64;
pub use norms::{NormReport, Route, SweepRow};
