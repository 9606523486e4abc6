use super::{MpMatrix, MpScalar, MplaError};

/// Lower-triangular `L` with `L Lᵀ = A`.
///
/// Fails with the first non-positive pivot, which makes this the
/// positive-definiteness oracle used throughout.
pub fn cholesky(a: &MpMatrix) -> Result<MpMatrix, MplaError> {
    a.require_symmetric()?;
    let n = a.rows();
    let prec = a.prec();
    let mut l = MpMatrix::zeros(prec, n, n);
    for j in 0..n {
        let mut d = a[(j, j)].clone();
        for k in 0..j {
            d.sub_mul(&l[(j, k)], &l[(j, k)]);
        }
        if d.is_zero() || d.is_sign_negative() || !d.is_finite() {
            return Err(MplaError::NotPositiveDefinite {
                pivot: j,
                value: d.to_f64(),
            });
        }
        let ljj = d.sqrt();
        let inv = ljj.recip();
        l[(j, j)] = ljj;
        for i in (j + 1)..n {
            let mut s = a[(i, j)].clone();
            for k in 0..j {
                s.sub_mul(&l[(i, k)], &l[(j, k)]);
            }
            l[(i, j)] = &s * &inv;
        }
    }
    Ok(l)
}

/// True iff the symmetric matrix is positive definite.
pub fn is_positive_definite(a: &MpMatrix) -> bool {
    cholesky(a).is_ok()
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse(l: &MpMatrix) -> MpMatrix {
    let n = l.rows();
    let prec = l.prec();
    let mut inv = MpMatrix::zeros(prec, n, n);
    for j in 0..n {
        inv[(j, j)] = l[(j, j)].recip();
        for i in (j + 1)..n {
            let mut s = MpScalar::zero(prec);
            for k in j..i {
                s.sub_mul(&l[(i, k)], &inv[(k, j)]);
            }
            inv[(i, j)] = &s / &l[(i, i)];
        }
    }
    inv
}

/// Inverse of `L Lᵀ` given its Cholesky factor.
pub fn spd_inverse_from_factor(l: &MpMatrix) -> MpMatrix {
    let li = lower_inverse(l);
    li.t_matmul(&li).symmetrize()
}

/// Solves `L Lᵀ x = b`.
pub fn cholesky_solve(l: &MpMatrix, b: &[MpScalar]) -> Vec<MpScalar> {
    let n = l.rows();
    let mut y: Vec<MpScalar> = Vec::with_capacity(n);
    for i in 0..n {
        let mut s = b[i].clone();
        for k in 0..i {
            s.sub_mul(&l[(i, k)], &y[k]);
        }
        y.push(&s / &l[(i, i)]);
    }
    let mut x = y;
    for i in (0..n).rev() {
        let mut s = x[i].clone();
        for k in (i + 1)..n {
            s.sub_mul(&l[(k, i)], &x[k]);
        }
        x[i] = &s / &l[(i, i)];
    }
    x
}
