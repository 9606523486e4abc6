//! Facial reduction for the dual `inf A₀•X s.t. A_k•X = b_k, X ⪰ 0`.
//!
//! A reducing certificate for a face `F` is `(y, U, V)` with `bᵀy = 0`,
//! `−Σ y_k A_k = U + V`, `U ⪰ 0`, `V ∈ F^⊥` and `U + V ∉ F^⊥`. Every feasible
//! `X` in `F` then lies in `F ∩ {U}^⊥`. Repeating until no certificate exists
//! yields the minimal face; the number of steps is the degree of singularity.

mod certificate;
mod criteria;
mod face;
mod reduction;

pub use certificate::{solve_discriminant, verify_certificate, Discriminant, ReducingCertificate};
pub use criteria::{
    invariance_by_eigenspan, invariance_by_orthogonality, invariance_by_proportionality,
    invariance_by_support, rank_condition, reduced_rank, support_indices, CriterionVerdict,
};
pub use face::{compare_faces, intersect_face, restrict_to_face, Face, FaceRelation};
pub use reduction::{
    audit, facial_reduction, linear_consistency, AuditReport, FacialManifest,
    FacialReductionResult, ReductionStatus,
};

use crate::ipm::{IpmError, SolveStatus, SolverConfig};
use crate::mpla::{default_cert_tol, MpScalar, MplaError};

#[derive(Debug, Clone, thiserror::Error)]
pub enum FacialError {
    #[error("matrix is not PSD on block {block} (min eigenvalue {min_eigenvalue:e})")]
    NotPsd { block: usize, min_eigenvalue: f64 },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("auxiliary solve ended with {status} after {completed} reduction steps")]
    SolverFailure {
        status: SolveStatus,
        completed: usize,
        partial: Option<Box<FacialReductionResult>>,
    },
    #[error("certificate did not shrink the face")]
    Stalled,
    #[error(transparent)]
    Solver(#[from] IpmError),
    #[error(transparent)]
    Linalg(#[from] MplaError),
    #[error("bad manifest: {0}")]
    Manifest(String),
}

/// Tolerances and search settings for the reduction loop.
#[derive(Clone, Debug)]
pub struct FacialConfig {
    pub precision_bits: u32,
    /// Threshold deciding zero eigenvalues and `U + V ∉ F^⊥`.
    pub cert_tol: MpScalar,
    /// Stopping tolerance of the auxiliary solves.
    pub aux_epsilon: MpScalar,
    /// Seeds the random basis of the auxiliary search space.
    pub seed: u64,
    pub max_aux_iterations: usize,
    /// Also search for `bᵀy > 0, −Σ y_k A_k ⪰ 0` when no certificate exists.
    pub farkas_check: bool,
}

impl FacialConfig {
    /// `cert_tol = 2^(−p/4)`, `aux_epsilon = 2^(−3p/4)`, at most 600
    /// iterations per auxiliary solve.
    pub fn new(prec: u32) -> Self {
        FacialConfig {
            precision_bits: prec,
            cert_tol: default_cert_tol(prec),
            aux_epsilon: MpScalar::pow2(prec, -((3 * prec / 4) as i32)),
            seed: 0,
            max_aux_iterations: 600,
            farkas_check: true,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_cert_tol(mut self, tol: MpScalar) -> Self {
        self.cert_tol = tol.with_prec(self.precision_bits);
        self
    }

    /// Auxiliary solver settings: gap tolerance `aux_epsilon`, feasibility
    /// tolerance `cert_tol²`.
    pub fn solver(&self) -> SolverConfig {
        let mut cfg =
            SolverConfig::fast(self.precision_bits, "1e-10").with_epsilon(&self.aux_epsilon);
        cfg.epsilon_star = self.cert_tol.square();
        cfg.max_iteration = self.max_aux_iterations;
        cfg
    }
}

impl Default for FacialConfig {
    fn default() -> Self {
        FacialConfig::new(crate::mpla::DEFAULT_PRECISION)
    }
}
