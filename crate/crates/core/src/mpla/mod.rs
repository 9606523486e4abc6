//! Arbitrary-precision dense linear algebra.
//!
//! Scalars are MPFR floats with an explicit mantissa precision. Matrices are
//! dense and row-major. Symmetry is never assumed: routines that need a
//! symmetric input check it exactly and callers symmetrize explicitly.

mod chol;
mod eig;
mod matrix;
mod scalar;
mod svd;

pub use chol::{
    cholesky, cholesky_solve, is_positive_definite, lower_inverse, spd_inverse_from_factor,
};
pub use eig::{sym_eig, sym_eigenvalues, SymEig, MAX_SWEEPS};
pub use matrix::{dot_vec, norm_vec, MpMatrix};
pub use scalar::{decimal_digits, MpScalar};
pub use svd::{
    numeric_rank, penrose_residuals, pseudoinverse, rank_of_matrix, stack_rows, svd, Svd,
};

/// Default mantissa precision in bits.
pub const DEFAULT_PRECISION: u32 = 1024;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MplaError {
    #[error("matrix is not symmetric")]
    NonSymmetric,
    #[error("matrix of shape {0:?} is not square")]
    NotSquare((usize, usize)),
    #[error("shape mismatch: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("no convergence after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("not positive definite: pivot {pivot} has value {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error("non-finite entry")]
    NonFinite,
    #[error("cannot parse number {0:?}")]
    Parse(String),
}

/// Rank tolerance `2^(−p/2)`.
pub fn default_rank_tol(prec: u32) -> MpScalar {
    MpScalar::pow2(prec, -((prec / 2) as i32))
}

/// Certificate tolerance `2^(−p/4)`.
pub fn default_cert_tol(prec: u32) -> MpScalar {
    MpScalar::pow2(prec, -((prec / 4) as i32))
}
