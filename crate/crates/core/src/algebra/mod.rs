//! Exact and float arithmetic: scalars, polynomials over the jet variables,
//! rational functions, the square-root extension, quarter powers of the
//! Hessian determinant and truncated Taylor series.

pub mod graded;
pub mod poly;
pub mod ratfunc;
pub mod scalar;
pub mod sqrtext;
pub mod taylor;

pub use graded::{hessian_det, GradedRho};
pub use poly::{pc, pv, Mono, Poly, Var, MAX_JET_ORDER, NVARS};
pub use ratfunc::RatFunc;
pub use scalar::{rat, Rational, Scalar};
pub use sqrtext::{s_squared, SqrtExt};
pub use taylor::{TaylorMap, MAX_TAYLOR_ORDER};
