use crate::mpla::{default_cert_tol, default_rank_tol, norm_vec, pseudoinverse, MpScalar};
use crate::sdpmodel::{lagrangian, BlockMatrix, SdpProblem};

use super::IpmError;

/// Projection of a reference point onto `{X : A_k•X = b_k}`.
#[derive(Clone, Debug)]
pub struct FeasiblePoint {
    pub x: BlockMatrix,
    /// `‖Sᵀvec(X) − b‖ / max(1, ‖b‖)`.
    pub residual: MpScalar,
}

/// `X = (I − S†ᵀSᵀ)X₀ + S†ᵀ b` with `S` the matrix of columns `vec A_k`.
///
/// Positive definiteness of the result is left to the caller.
pub fn strictly_feasible_point(
    prob: &SdpProblem,
    x0: &BlockMatrix,
) -> Result<FeasiblePoint, IpmError> {
    let prec = prob.prec();
    if x0.dims() != prob.block_dims {
        return Err(IpmError::InvalidConfig(
            "reference point has the wrong block structure".into(),
        ));
    }
    let x0 = x0.with_prec(prec);
    let st = prob.constraint_matrix().transpose();
    let pinv = pseudoinverse(&st, &default_rank_tol(prec))?;
    let v0 = x0.vec();
    let gap: Vec<MpScalar> = st
        .mul_vec(&v0)
        .iter()
        .zip(&prob.b)
        .map(|(s, b)| b - s)
        .collect();
    let corr = pinv.mul_vec(&gap);
    let v: Vec<MpScalar> = v0.iter().zip(&corr).map(|(a, c)| a + c).collect();
    let x = BlockMatrix::from_vec(prec, &prob.block_dims, &v).symmetrize();
    let res: Vec<MpScalar> = st
        .mul_vec(&x.vec())
        .iter()
        .zip(&prob.b)
        .map(|(s, b)| s - b)
        .collect();
    let scale = norm_vec(&prob.b).max(&MpScalar::one(prec));
    let residual = &norm_vec(&res) / &scale;
    if residual > default_cert_tol(prec) {
        return Err(IpmError::Infeasible {
            residual: residual.to_f64(),
        });
    }
    Ok(FeasiblePoint { x, residual })
}

/// Tests `L(X̃, y) ≤ L(X̃, ỹ) ≤ L(X, ỹ)` on every probe `(X, y)` within `tol`.
///
/// Shape mismatches count as failures.
pub fn check_saddle_point(
    prob: &SdpProblem,
    x_opt: &BlockMatrix,
    y_opt: &[MpScalar],
    probes: &[(BlockMatrix, Vec<MpScalar>)],
    tol: &MpScalar,
) -> bool {
    let centre = match lagrangian(prob, x_opt, y_opt) {
        Ok(v) => v,
        Err(_) => return false,
    };
    let upper = &centre + tol;
    let lower = &centre - tol;
    probes.iter().all(|(x, y)| {
        let left = lagrangian(prob, x_opt, y);
        let right = lagrangian(prob, x, y_opt);
        matches!((left, right), (Ok(l), Ok(r)) if l <= upper && r >= lower)
    })
}
