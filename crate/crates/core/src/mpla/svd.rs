use super::{MpMatrix, MpScalar, MplaError};

const MAX_SVD_SWEEPS: usize = 100;

/// Thin singular value decomposition `A = U diag(σ) Vᵀ`, σ descending.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: MpMatrix,
    pub sigma: Vec<MpScalar>,
    pub v: MpMatrix,
}

/// One-sided (Hestenes) Jacobi SVD.
///
/// Works on columns directly, so singular values are never squared and
/// rank decisions keep the full working precision.
pub fn svd(a: &MpMatrix) -> Result<Svd, MplaError> {
    if !a.is_finite() {
        return Err(MplaError::NonFinite);
    }
    if a.rows() < a.cols() {
        let t = svd(&a.transpose())?;
        return Ok(Svd {
            u: t.v,
            sigma: t.sigma,
            v: t.u,
        });
    }
    let prec = a.prec();
    let (m, n) = a.shape();
    let mut u = a.clone();
    let mut v = MpMatrix::identity(prec, n);
    let eps = MpScalar::pow2(prec, -(prec as i32) + 4);
    let negligible = (&eps * &a.frobenius_norm()).square();

    let mut converged = n < 2;
    for _ in 0..MAX_SVD_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in (p + 1)..n {
                let mut alpha = MpScalar::zero(prec);
                let mut beta = MpScalar::zero(prec);
                let mut gamma = MpScalar::zero(prec);
                for i in 0..m {
                    alpha.add_mul(&u[(i, p)], &u[(i, p)]);
                    beta.add_mul(&u[(i, q)], &u[(i, q)]);
                    gamma.add_mul(&u[(i, p)], &u[(i, q)]);
                }
                if gamma.is_zero()
                    || alpha <= negligible
                    || beta <= negligible
                    || gamma.abs() <= &eps * &(&alpha * &beta).sqrt()
                {
                    continue;
                }
                rotated = true;
                let two = MpScalar::from_i64(prec, 2);
                let one = MpScalar::one(prec);
                let zeta = (&beta - &alpha) / (&two * &gamma);
                let mut t = (zeta.abs() + (&zeta.square() + &one).sqrt()).recip();
                if zeta.is_sign_negative() {
                    t = -t;
                }
                let c = (&t.square() + &one).sqrt().recip();
                let s = &c * &t;
                for i in 0..m {
                    let up = u[(i, p)].clone();
                    let uq = u[(i, q)].clone();
                    u[(i, p)] = &c * &up - &s * &uq;
                    u[(i, q)] = &s * &up + &c * &uq;
                }
                for i in 0..n {
                    let vp = v[(i, p)].clone();
                    let vq = v[(i, q)].clone();
                    v[(i, p)] = &c * &vp - &s * &vq;
                    v[(i, q)] = &s * &vp + &c * &vq;
                }
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(MplaError::NoConvergence {
            sweeps: MAX_SVD_SWEEPS,
        });
    }

    let mut sigma: Vec<MpScalar> = (0..n)
        .map(|j| {
            let mut s = MpScalar::zero(prec);
            for i in 0..m {
                s.add_mul(&u[(i, j)], &u[(i, j)]);
            }
            s.sqrt()
        })
        .collect();
    for (j, s) in sigma.iter().enumerate() {
        if !s.is_zero() {
            let inv = s.recip();
            for i in 0..m {
                u[(i, j)] = &u[(i, j)] * &inv;
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        sigma[j]
            .partial_cmp(&sigma[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let u = u.select_columns(&order);
    let v = v.select_columns(&order);
    sigma = order.iter().map(|&i| sigma[i].clone()).collect();
    Ok(Svd { u, sigma, v })
}

/// Number of singular values above `tol·σ_max`.
pub fn rank_of_matrix(a: &MpMatrix, tol: &MpScalar) -> Result<usize, MplaError> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0);
    }
    let s = svd(a)?;
    Ok(count_above(&s.sigma, tol))
}

fn count_above(sigma: &[MpScalar], tol: &MpScalar) -> usize {
    match sigma.first() {
        None => 0,
        Some(max) if max.is_zero() => 0,
        Some(max) => {
            let cut = tol * max;
            sigma.iter().filter(|s| **s > cut).count()
        }
    }
}

/// Rank of the span of a set of equally shaped matrices.
///
/// Each matrix is vectorized into one row; the rank is the number of
/// singular values of the stacked matrix above `tol·σ_max`.
pub fn numeric_rank(vectors: &[MpMatrix], tol: &MpScalar) -> Result<usize, MplaError> {
    let Some(first) = vectors.first() else {
        return Ok(0);
    };
    let shape = first.shape();
    for m in vectors {
        if m.shape() != shape {
            return Err(MplaError::ShapeMismatch {
                expected: shape,
                found: m.shape(),
            });
        }
    }
    let stacked = stack_rows(vectors);
    rank_of_matrix(&stacked, tol)
}

/// Matrix whose i-th row is `vec(vectors[i])`.
pub fn stack_rows(vectors: &[MpMatrix]) -> MpMatrix {
    let prec = vectors.iter().map(|m| m.prec()).max().unwrap_or(64);
    let width = vectors.first().map_or(0, |m| m.rows() * m.cols());
    let mut out = MpMatrix::zeros(prec, vectors.len(), width);
    for (i, m) in vectors.iter().enumerate() {
        for (j, x) in m.entries().iter().enumerate() {
            out[(i, j)] = x.clone();
        }
    }
    out
}

/// Moore–Penrose pseudoinverse with relative singular value cutoff `tol`.
pub fn pseudoinverse(s: &MpMatrix, tol: &MpScalar) -> Result<MpMatrix, MplaError> {
    let prec = s.prec();
    let (m, n) = s.shape();
    if m == 0 || n == 0 {
        return Ok(MpMatrix::zeros(prec, n, m));
    }
    let d = svd(s)?;
    let r = count_above(&d.sigma, tol);
    let mut out = MpMatrix::zeros(prec, n, m);
    for l in 0..r {
        let inv = d.sigma[l].recip();
        for i in 0..n {
            let vi = &d.v[(i, l)] * &inv;
            for j in 0..m {
                out[(i, j)].add_mul(&vi, &d.u[(j, l)]);
            }
        }
    }
    Ok(out)
}

/// Residuals of the four Penrose identities, each divided by `‖S‖_F`.
pub fn penrose_residuals(s: &MpMatrix, pinv: &MpMatrix) -> [MpScalar; 4] {
    let norm = s.frobenius_norm();
    let scale = if norm.is_zero() {
        MpScalar::one(s.prec())
    } else {
        norm
    };
    let sp = s.matmul(pinv);
    let ps = pinv.matmul(s);
    let r1 = sp.matmul(s).sub(s).frobenius_norm();
    let r2 = ps.matmul(pinv).sub(pinv).frobenius_norm();
    let r3 = sp.transpose().sub(&sp).frobenius_norm();
    let r4 = ps.transpose().sub(&ps).frobenius_norm();
    [r1 / &scale, r2 / &scale, r3 / &scale, r4 / &scale]
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    fn tol() -> MpScalar {
        MpScalar::pow2(P, -128)
    }

    #[test]
    fn zero_span_has_rank_zero() {
        let z = MpMatrix::zeros(P, 2, 2);
        assert_eq!(numeric_rank(&[z.clone(), z], &tol()).unwrap(), 0);
    }

    #[test]
    fn rank_detects_dependence() {
        let a = MpMatrix::from_i64_rows(P, &[&[1, 2], &[2, 1]]);
        let b = MpMatrix::from_i64_rows(P, &[&[0, 1], &[1, 0]]);
        let c = a.add(&b.scale(&MpScalar::from_i64(P, 3)));
        assert_eq!(numeric_rank(&[a, b, c], &tol()).unwrap(), 2);
    }

    #[test]
    fn rank_shape_mismatch() {
        let a = MpMatrix::zeros(P, 2, 2);
        let b = MpMatrix::zeros(P, 3, 3);
        assert!(matches!(
            numeric_rank(&[a, b], &tol()),
            Err(MplaError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn pinv_identity_and_diagonal() {
        let i3 = MpMatrix::identity(P, 3);
        let p = pseudoinverse(&i3, &tol()).unwrap();
        assert!(p.sub(&i3).max_abs() < tol());
        let d = MpMatrix::from_i64_rows(P, &[&[2, 0], &[0, 0]]);
        let p = pseudoinverse(&d, &tol()).unwrap();
        let half = MpScalar::ratio(P, 1, 2);
        assert_eq!(p[(0, 0)], half);
        assert!(p[(1, 1)].is_zero());
    }

    #[test]
    fn wide_matrix_penrose() {
        let s = MpMatrix::from_i64_rows(P, &[&[1, 2, 3], &[2, 4, 6]]);
        let p = pseudoinverse(&s, &tol()).unwrap();
        for r in penrose_residuals(&s, &p) {
            assert!(r < MpScalar::pow2(P, -200));
        }
    }
}
