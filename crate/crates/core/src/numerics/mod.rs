//! Scalars, complex numbers, special functions and small exact linear solvers.

mod complex;
mod linsolve;
mod scalar;
mod special;

pub use complex::ComplexScalar;
pub use linsolve::{solve_dense, solve_tridiagonal};
pub use scalar::{dot, Backend, Scalar, DEFAULT_PRECISION, MIN_PRECISION};
pub use special::{
    binomial, catalan, gamma_ratio_3half_3, hyp2f1, hyp2f1_with_cap, HYP2F1_MAX_TERMS,
};
