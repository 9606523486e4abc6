use super::{MpMatrix, MpScalar, MplaError};

/// Jacobi sweep cap.
pub const MAX_SWEEPS: usize = 100;

/// Symmetric eigendecomposition `A = Q diag(λ) Qᵀ`, eigenvalues descending.
#[derive(Clone, Debug)]
pub struct SymEig {
    pub eigenvalues: Vec<MpScalar>,
    pub eigenvectors: MpMatrix,
}

impl SymEig {
    pub fn reconstruct(&self) -> MpMatrix {
        let q = &self.eigenvectors;
        let prec = q.prec();
        let n = q.rows();
        let mut out = MpMatrix::zeros(prec, n, n);
        for (l, lam) in self.eigenvalues.iter().enumerate() {
            if lam.is_zero() {
                continue;
            }
            for i in 0..n {
                let qi = &q[(i, l)] * lam;
                for j in 0..n {
                    out[(i, j)].add_mul(&qi, &q[(j, l)]);
                }
            }
        }
        out
    }

    pub fn min_eigenvalue(&self) -> Option<&MpScalar> {
        self.eigenvalues.last()
    }

    pub fn max_eigenvalue(&self) -> Option<&MpScalar> {
        self.eigenvalues.first()
    }

    /// `Σ_{λ_l>0} λ_l q_l q_lᵀ`, the nearest PSD matrix in Frobenius norm.
    pub fn psd_part(&self) -> MpMatrix {
        let clipped = SymEig {
            eigenvalues: self
                .eigenvalues
                .iter()
                .map(|l| {
                    if l.is_sign_negative() {
                        MpScalar::zero(l.prec())
                    } else {
                        l.clone()
                    }
                })
                .collect(),
            eigenvectors: self.eigenvectors.clone(),
        };
        clipped.reconstruct()
    }
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
///
/// Iterates until the off-diagonal Frobenius mass is at most
/// `tol·‖A‖_F` (or the working-precision floor), with ties among equal
/// eigenvalues kept in original index order.
pub fn sym_eig(a: &MpMatrix, tol: &MpScalar) -> Result<SymEig, MplaError> {
    a.require_symmetric()?;
    if !a.is_finite() {
        return Err(MplaError::NonFinite);
    }
    let prec = a.prec();
    let n = a.rows();
    let mut w = a.clone();
    let mut q = MpMatrix::identity(prec, n);
    let norm = a.frobenius_norm();
    let floor = MpScalar::pow2(prec, -(prec as i32) + 4) * &norm;
    let target = (tol * &norm).max(&floor);

    let mut converged = n < 2 || norm.is_zero();
    let mut sweeps = 0;
    while !converged {
        if off_diagonal_norm(&w) <= target {
            converged = true;
            break;
        }
        if sweeps == MAX_SWEEPS {
            break;
        }
        sweeps += 1;
        let mut rotated = false;
        for p in 0..n {
            for r in (p + 1)..n {
                if rotate(&mut w, &mut q, p, r) {
                    rotated = true;
                }
            }
        }
        if !rotated {
            converged = true;
        }
    }
    if !converged {
        return Err(MplaError::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        w[(j, j)]
            .partial_cmp(&w[(i, i)])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let eigenvalues = order.iter().map(|&i| w[(i, i)].clone()).collect();
    let eigenvectors = q.select_columns(&order);
    Ok(SymEig {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigenvalues only.
pub fn sym_eigenvalues(a: &MpMatrix, tol: &MpScalar) -> Result<Vec<MpScalar>, MplaError> {
    Ok(sym_eig(a, tol)?.eigenvalues)
}

fn off_diagonal_norm(w: &MpMatrix) -> MpScalar {
    let n = w.rows();
    let mut acc = MpScalar::zero(w.prec());
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc.add_mul(&w[(i, j)], &w[(i, j)]);
            }
        }
    }
    acc.sqrt()
}

/// Annihilates `w[p][r]` with a Jacobi rotation; returns false when already zero.
fn rotate(w: &mut MpMatrix, q: &mut MpMatrix, p: usize, r: usize) -> bool {
    let apr = w[(p, r)].clone();
    if apr.is_zero() {
        return false;
    }
    let prec = w.prec();
    let n = w.rows();
    let app = w[(p, p)].clone();
    let arr = w[(r, r)].clone();
    let two = MpScalar::from_i64(prec, 2);
    let one = MpScalar::one(prec);
    let theta = (&arr - &app) / (&two * &apr);
    let denom = theta.abs() + (&theta.square() + &one).sqrt();
    let mut t = denom.recip();
    if theta.is_sign_negative() {
        t = -t;
    }
    let c = (&t.square() + &one).sqrt().recip();
    let s = &t * &c;

    for k in 0..n {
        if k == p || k == r {
            continue;
        }
        let wkp = w[(k, p)].clone();
        let wkr = w[(k, r)].clone();
        let new_kp = &c * &wkp - &s * &wkr;
        let new_kr = &s * &wkp + &c * &wkr;
        w[(k, p)] = new_kp.clone();
        w[(p, k)] = new_kp;
        w[(k, r)] = new_kr.clone();
        w[(r, k)] = new_kr;
    }
    w[(p, p)] = &app - &(&t * &apr);
    w[(r, r)] = &arr + &(&t * &apr);
    w[(p, r)] = MpScalar::zero(prec);
    w[(r, p)] = MpScalar::zero(prec);

    for k in 0..n {
        let qkp = q[(k, p)].clone();
        let qkr = q[(k, r)].clone();
        q[(k, p)] = &c * &qkp - &s * &qkr;
        q[(k, r)] = &s * &qkp + &c * &qkr;
    }
    true
}
