use serde::{Deserialize, Serialize};

use crate::mpla::{sym_eig, MpMatrix, MpScalar};
use crate::sdpmodel::{BlockMatrix, SdpProblem};

use super::FacialError;

/// A face of a product of PSD cones.
///
/// Block `b` is `{Q_b (0 ⊕ X) Q_bᵀ : X ⪰ 0}` with `X` of order `r_b`; the
/// residual range is spanned by the last `r_b` columns of `Q_b`.
#[derive(Clone, Debug, PartialEq)]
pub struct Face {
    pub q: Vec<MpMatrix>,
    pub r: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FaceRelation {
    Equal,
    FSubsetG,
    GSubsetF,
    Incomparable,
}

impl Face {
    pub fn whole(prec: u32, dims: &[usize]) -> Self {
        Face {
            q: dims.iter().map(|&n| MpMatrix::identity(prec, n)).collect(),
            r: dims.to_vec(),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.q.iter().map(|q| q.rows()).collect()
    }

    pub fn prec(&self) -> u32 {
        self.q.first().map_or(64, |q| q.prec())
    }

    pub fn total_residual(&self) -> usize {
        self.r.iter().sum()
    }

    pub fn is_whole(&self) -> bool {
        self.r == self.dims()
    }

    /// The `n_b × r_b` matrix whose columns span the residual range.
    pub fn residual_basis(&self, b: usize) -> MpMatrix {
        let q = &self.q[b];
        let n = q.rows();
        q.submatrix(0, n - self.r[b], n, self.r[b])
    }

    /// `(QᵀMQ)₃` for every block, including empty ones.
    pub fn reduce(&self, m: &BlockMatrix) -> Vec<MpMatrix> {
        m.blocks
            .iter()
            .enumerate()
            .map(|(b, blk)| blk.congruence(&self.residual_basis(b)).symmetrize())
            .collect()
    }

    /// `P₃ X P₃ᵀ` per block; `reduced` lists only blocks with `r > 0`.
    pub fn lift(&self, reduced: &[MpMatrix]) -> BlockMatrix {
        let prec = self.prec();
        let mut it = reduced.iter();
        let blocks = self
            .q
            .iter()
            .enumerate()
            .map(|(b, q)| {
                let n = q.rows();
                if self.r[b] == 0 {
                    return MpMatrix::zeros(prec, n, n);
                }
                let x = it.next().expect("one reduced block per active block");
                let p = self.residual_basis(b);
                p.matmul(&x.matmul(&p.transpose())).symmetrize()
            })
            .collect();
        BlockMatrix::new(blocks)
    }

    /// Indices of blocks with `r > 0`.
    pub fn active_blocks(&self) -> Vec<usize> {
        (0..self.r.len()).filter(|&b| self.r[b] > 0).collect()
    }

    /// `max_b ‖Q_bᵀQ_b − I‖_max`.
    pub fn orthogonality_error(&self) -> MpScalar {
        let mut e = MpScalar::zero(self.prec());
        for q in &self.q {
            let g = q.t_matmul(q).sub(&MpMatrix::identity(q.prec(), q.cols()));
            e = e.max(&g.max_abs());
        }
        e
    }

    /// Whether `V ∈ F^⊥` within `tol`, i.e. `(QᵀVQ)₃ = 0`.
    pub fn contains_in_perp(&self, v: &BlockMatrix, tol: &MpScalar) -> bool {
        self.reduce(v).iter().all(|m| m.max_abs() <= *tol)
    }
}

/// `F ∩ {U}^⊥` for `U ⪰ 0` given in ambient coordinates.
///
/// Directions of `(QᵀUQ)₃` with eigenvalue at most `tol·max(1, λ_max)` stay
/// in the residual range.
pub fn intersect_face(f: &Face, u: &BlockMatrix, tol: &MpScalar) -> Result<Face, FacialError> {
    if u.dims() != f.dims() {
        return Err(FacialError::ShapeMismatch(format!(
            "face blocks {:?}, matrix blocks {:?}",
            f.dims(),
            u.dims()
        )));
    }
    let prec = f.prec();
    let mut out = f.clone();
    for (b, w) in f.reduce(u).into_iter().enumerate() {
        let r = f.r[b];
        if r == 0 || w.max_abs().is_zero() {
            continue;
        }
        let eig = sym_eig(&w, &MpScalar::pow2(prec, -(prec as i32)))?;
        let top = eig.max_eigenvalue().expect("nonempty").clone();
        let cut = tol * &top.max(&MpScalar::one(prec));
        let low = eig.min_eigenvalue().expect("nonempty");
        if *low < -&cut {
            return Err(FacialError::NotPsd {
                block: b,
                min_eigenvalue: low.to_f64(),
            });
        }
        let keep = eig.eigenvalues.iter().filter(|l| **l <= cut).count();
        if keep == r {
            continue;
        }
        // Eigenvalues are descending, so the kept directions come last.
        let n = f.q[b].rows();
        let mut compose = MpMatrix::identity(prec, n);
        compose.set_submatrix(n - r, n - r, &eig.eigenvectors);
        out.q[b] = f.q[b].matmul(&compose);
        out.r[b] = keep;
    }
    Ok(out)
}

/// The problem over the residual blocks: data `(QᵀA_kQ)₃`, blocks with
/// `r = 0` dropped.
pub fn restrict_to_face(prob: &SdpProblem, f: &Face) -> SdpProblem {
    let active = f.active_blocks();
    let a: Vec<BlockMatrix> = prob
        .a
        .iter()
        .map(|m| {
            let red = f.reduce(m);
            BlockMatrix::new(active.iter().map(|&b| red[b].clone()).collect())
        })
        .collect();
    let dims: Vec<usize> = active.iter().map(|&b| f.r[b]).collect();
    SdpProblem {
        diagonal_blocks: vec![false; dims.len()],
        block_dims: dims,
        m: prob.m,
        a,
        b: prob.b.clone(),
    }
}

fn range_contained(a: &MpMatrix, b: &MpMatrix, tol: &MpScalar) -> bool {
    if a.cols() == 0 {
        return true;
    }
    if b.cols() < a.cols() {
        return false;
    }
    let proj = b.matmul(&b.t_matmul(a));
    a.sub(&proj).max_abs() <= *tol
}

/// Compares residual ranges block by block.
pub fn compare_faces(f: &Face, g: &Face, tol: &MpScalar) -> FaceRelation {
    assert_eq!(f.dims(), g.dims(), "faces of different cones");
    let n = f.r.len();
    let f_in_g = (0..n).all(|b| range_contained(&f.residual_basis(b), &g.residual_basis(b), tol));
    let g_in_f = (0..n).all(|b| range_contained(&g.residual_basis(b), &f.residual_basis(b), tol));
    match (f_in_g, g_in_f) {
        (true, true) => FaceRelation::Equal,
        (true, false) => FaceRelation::FSubsetG,
        (false, true) => FaceRelation::GSubsetF,
        (false, false) => FaceRelation::Incomparable,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::expprimal;
    use crate::mpla::default_cert_tol;

    const P: u32 = 256;

    fn reducing_u() -> BlockMatrix {
        let mut u = BlockMatrix::zeros(P, &[6, 2]);
        u.blocks[0][(0, 0)] = MpScalar::from_i64(P, 2);
        u.blocks[1][(0, 0)] = MpScalar::one(P);
        u
    }

    #[test]
    fn first_certificate_face() {
        let whole = Face::whole(P, &[6, 2]);
        let tol = default_cert_tol(P);
        let f1 = intersect_face(&whole, &reducing_u(), &tol).unwrap();
        assert_eq!(f1.r, vec![5, 1]);
        assert!(f1.orthogonality_error().to_f64() < 1e-70);
        let same = intersect_face(&whole, &BlockMatrix::zeros(P, &[6, 2]), &tol).unwrap();
        assert_eq!(same, whole);
        assert_eq!(compare_faces(&f1, &whole, &tol), FaceRelation::FSubsetG);
        assert_eq!(compare_faces(&f1, &f1, &tol), FaceRelation::Equal);
        let neg = intersect_face(&whole, &reducing_u().neg(), &tol);
        assert!(matches!(neg, Err(FacialError::NotPsd { .. })));
    }

    #[test]
    fn restriction_and_lift() {
        let tol = default_cert_tol(P);
        let prob = expprimal(P);
        let whole = Face::whole(P, &prob.block_dims);
        assert_eq!(restrict_to_face(&prob, &whole), prob);
        let f1 = intersect_face(&whole, &reducing_u(), &tol).unwrap();
        let red = restrict_to_face(&prob, &f1);
        assert_eq!(red.block_dims, vec![5, 1]);
        let x = BlockMatrix::identity(P, &[5, 1]);
        let lifted = f1.lift(&x.blocks);
        for k in 0..=prob.m {
            let d = &red.a[k].dot(&x) - &prob.a[k].dot(&lifted);
            assert!(d.abs().to_f64() < 1e-70);
        }
        assert!(lifted.blocks[0][(0, 0)].abs().to_f64() < 1e-70);
    }

    #[test]
    fn incomparable_faces() {
        let tol = default_cert_tol(P);
        let whole = Face::whole(P, &[2]);
        let mut e1 = BlockMatrix::zeros(P, &[2]);
        e1.blocks[0][(0, 0)] = MpScalar::one(P);
        let mut e2 = BlockMatrix::zeros(P, &[2]);
        e2.blocks[0][(1, 1)] = MpScalar::one(P);
        let a = intersect_face(&whole, &e1, &tol).unwrap();
        let b = intersect_face(&whole, &e2, &tol).unwrap();
        assert_eq!(compare_faces(&a, &b, &tol), FaceRelation::Incomparable);
    }
}
