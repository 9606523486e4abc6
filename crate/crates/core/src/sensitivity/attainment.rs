use serde::Serialize;

use crate::mpla::{
    default_rank_tol, norm_vec, pseudoinverse, sym_eig, MpMatrix, MpScalar, MplaError,
};
use crate::sdpmodel::{BlockMatrix, SdpProblem};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AttainmentError {
    #[error("eigenvalue {eigenvalue:e} of block {block} is neither zero nor in the range")]
    RankAmbiguity { block: usize, eigenvalue: f64 },
    #[error("dual point has the wrong block structure")]
    Shape,
    #[error(transparent)]
    Linalg(#[from] MplaError),
}

#[derive(Clone, Debug, Serialize)]
pub enum Attainment {
    /// `y` solves the complementarity equations; its slack may still need
    /// a PSD check, reported as `slack_min_eigenvalue`.
    Attained {
        y: Vec<MpScalar>,
        residual: MpScalar,
        slack_min_eigenvalue: MpScalar,
    },
    /// The equations `Z(y) v = 0` over the range of `X` have no solution;
    /// `residual` is the least-squares misfit.
    NotAttained { residual: MpScalar },
}

/// Whether `(P)` can have an optimizer complementary to the dual optimum `x`.
///
/// An optimal `y` must satisfy `(A₀ − Σ y_k A_k) v = 0` for every range
/// vector `v` of `x`. Eigenvalues of `x` at most `tol·s` count as zero and
/// those above `√tol·s` as range, with `s = max(1, λ_max)`; anything in
/// between is ambiguous.
pub fn attainment_check(
    prob: &SdpProblem,
    x: &BlockMatrix,
    tol: &MpScalar,
) -> Result<Attainment, AttainmentError> {
    if x.dims() != prob.block_dims {
        return Err(AttainmentError::Shape);
    }
    let prec = prob.prec();
    let one = MpScalar::one(prec);
    let tol = tol.with_prec(prec);
    let wide = tol.sqrt();
    let eig_tol = MpScalar::pow2(prec, -(prec as i32));
    let mut rows: Vec<MpScalar> = Vec::new();
    let mut rhs: Vec<MpScalar> = Vec::new();
    for (b, xb) in x.blocks.iter().enumerate() {
        if xb.rows() == 0 {
            continue;
        }
        let e = sym_eig(&xb.symmetrize().with_prec(prec), &eig_tol)?;
        let s = e.max_eigenvalue().expect("nonempty").max(&one);
        for (l, lam) in e.eigenvalues.iter().enumerate() {
            if *lam <= &tol * &s {
                continue;
            }
            if *lam <= &wide * &s {
                return Err(AttainmentError::RankAmbiguity {
                    block: b,
                    eigenvalue: lam.to_f64(),
                });
            }
            let v = e.eigenvectors.column(l);
            let av: Vec<Vec<MpScalar>> = prob.a.iter().map(|a| a.blocks[b].mul_vec(&v)).collect();
            for i in 0..v.len() {
                rhs.push(av[0][i].clone());
                rows.extend((1..=prob.m).map(|k| av[k][i].clone()));
            }
        }
    }
    if rhs.is_empty() {
        return Ok(Attainment::Attained {
            y: vec![MpScalar::zero(prec); prob.m],
            residual: MpScalar::zero(prec),
            slack_min_eigenvalue: min_slack_eigenvalue(prob, &vec![MpScalar::zero(prec); prob.m])?,
        });
    }
    let m_mat = MpMatrix::from_row_major(prec, rhs.len(), prob.m, rows)?;
    let y = pseudoinverse(&m_mat, &default_rank_tol(prec))?.mul_vec(&rhs);
    let fit = m_mat.mul_vec(&y);
    let miss: Vec<MpScalar> = fit.iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let residual = &norm_vec(&miss) / &norm_vec(&rhs).max(&one);
    if residual > tol {
        return Ok(Attainment::NotAttained { residual });
    }
    let slack_min_eigenvalue = min_slack_eigenvalue(prob, &y)?;
    Ok(Attainment::Attained {
        y,
        residual,
        slack_min_eigenvalue,
    })
}

fn min_slack_eigenvalue(prob: &SdpProblem, y: &[MpScalar]) -> Result<MpScalar, MplaError> {
    let prec = prob.prec();
    let eig_tol = MpScalar::pow2(prec, -(prec as i32));
    let mut low: Option<MpScalar> = None;
    for blk in prob.slack(y).blocks {
        if blk.rows() == 0 {
            continue;
        }
        let e = sym_eig(&blk.symmetrize(), &eig_tol)?;
        let m = e.min_eigenvalue().expect("nonempty").clone();
        low = Some(low.map_or(m.clone(), |l| l.min(&m)));
    }
    Ok(low.unwrap_or_else(|| MpScalar::zero(prec)))
}
