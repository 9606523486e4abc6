//! Primal–dual path-following solver in arbitrary precision.
//!
//! Infeasible-start Mehrotra predictor–corrector with the HRVW/KSH/M
//! search direction, configured through SDPA-style parameters.

mod config;
mod feasible;
mod solver;

pub use config::SolverConfig;
pub use feasible::{check_saddle_point, strictly_feasible_point, FeasiblePoint};
pub use solver::solve;

use serde::Serialize;

use crate::mpla::{MpScalar, MplaError};
use crate::sdpmodel::{SdpError, SolutionPair};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IpmError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Model(#[from] SdpError),
    #[error(transparent)]
    Linalg(#[from] MplaError),
    #[error("linear constraints are inconsistent (residual {residual:e})")]
    Infeasible { residual: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SolveStatus {
    Optimal,
    /// `A₀•X` fell below `lowerBound` while `X` was feasible, so `(P)` has
    /// no feasible point.
    PrimalInfeasibleDetected,
    /// The equations `A_k•X = b_k` are inconsistent, so `(D)` is infeasible.
    DualInfeasibleDetected,
    /// `bᵀy` exceeded `upperBound` while `y` was feasible.
    Unbounded,
    IterationCap,
    NumericalBreakdown,
}

impl SolveStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            SolveStatus::Optimal => "Optimal",
            SolveStatus::PrimalInfeasibleDetected => "PrimalInfeasibleDetected",
            SolveStatus::DualInfeasibleDetected => "DualInfeasibleDetected",
            SolveStatus::Unbounded => "Unbounded",
            SolveStatus::IterationCap => "IterationCap",
            SolveStatus::NumericalBreakdown => "NumericalBreakdown",
        }
    }
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One accepted iteration, in double precision for logging.
#[derive(Clone, Debug, Serialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub mu: f64,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub primal_obj: f64,
    pub dual_obj: f64,
    pub step_primal: f64,
    pub step_dual: f64,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub solution: SolutionPair,
    pub iterations: usize,
    pub final_mu: MpScalar,
    pub residual_history: Vec<IterationRecord>,
    /// Constraints kept after removing linearly dependent `A_k`.
    pub kept_constraints: Vec<usize>,
}

impl SolveReport {
    /// `|A₀•X − bᵀy| / max(1, (|A₀•X| + |bᵀy|)/2)`.
    pub fn relative_gap(&self) -> MpScalar {
        relative_gap(&self.solution.primal_obj, &self.solution.dual_obj)
    }
}

pub(crate) fn relative_gap(p: &MpScalar, d: &MpScalar) -> MpScalar {
    let prec = p.prec();
    let scale = (&(&p.abs() + &d.abs()) / &MpScalar::from_i64(prec, 2)).max(&MpScalar::one(prec));
    &(d - p).abs() / &scale
}
