use std::collections::BTreeSet;

use serde::Serialize;

use crate::mpla::{
    default_cert_tol, default_rank_tol, dot_vec, norm_vec, numeric_rank, sym_eig, MpMatrix,
    MpScalar,
};
use crate::sdpmodel::{BlockMatrix, PerturbedFamily, SdpProblem};

use super::{Face, FacialReductionResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CriterionVerdict {
    Holds,
    Fails,
    /// The directions `D_k` are not multiples of one matrix.
    NotFactorable,
}

/// `vec` of the concatenated residual blocks of `(QᵀA_kQ)₃`, as a row.
fn reduced_row(f: &Face, m: &BlockMatrix) -> MpMatrix {
    let v: Vec<MpScalar> = f.reduce(m).iter().flat_map(|b| b.vec()).collect();
    MpMatrix::from_row_major(m.prec(), 1, v.len(), v).expect("row shape")
}

/// `rank{(QᵀA_kQ)₃ : k = 1..m}` with rank tolerance `2^(−p/4)`, which sits
/// above the rounding left in a computed face basis.
pub fn reduced_rank(prob: &SdpProblem, f: &Face) -> usize {
    let rows: Vec<MpMatrix> = (1..=prob.m).map(|k| reduced_row(f, &prob.a[k])).collect();
    if rows.iter().all(|r| r.cols() == 0) {
        return 0;
    }
    numeric_rank(&rows, &default_cert_tol(prob.prec())).expect("equal shapes")
}

/// Whether `rank{(Qᵀ A_k(t) Q)₃}` equals the base rank at each `t`.
pub fn rank_condition(
    base: &SdpProblem,
    fam: &PerturbedFamily,
    f_min: &Face,
    t_grid: &[MpScalar],
) -> Vec<bool> {
    let prec = f_min.prec();
    let r0 = reduced_rank(&base.with_prec(prec), f_min);
    t_grid
        .iter()
        .map(|t| reduced_rank(&fam.apply(t).with_prec(prec), f_min) == r0)
        .collect()
}

/// `{k : ŷ^i_k = 0 for every certificate i}`, with zero meaning at most
/// `tol·‖ŷ^i‖`.
pub fn support_indices(seq: &FacialReductionResult, m: usize, tol: &MpScalar) -> BTreeSet<usize> {
    (1..=m)
        .filter(|&k| {
            seq.certificates.iter().all(|c| {
                let cut = tol * &norm_vec(&c.y);
                c.y[k - 1].abs() <= cut
            })
        })
        .collect()
}

/// Every moving constraint lies in the zero support of the certificates.
pub fn invariance_by_support(
    seq: &FacialReductionResult,
    fam: &PerturbedFamily,
    tol: &MpScalar,
) -> CriterionVerdict {
    let k_hat = support_indices(seq, fam.base.m, tol);
    if fam.perturbed_indices().iter().all(|k| k_hat.contains(k)) {
        CriterionVerdict::Holds
    } else {
        CriterionVerdict::Fails
    }
}

/// Support condition plus `D_k ∈ F_min^⊥` for every moving `k`.
pub fn invariance_by_orthogonality(
    seq: &FacialReductionResult,
    fam: &PerturbedFamily,
    tol: &MpScalar,
) -> CriterionVerdict {
    if invariance_by_support(seq, fam, tol) == CriterionVerdict::Fails {
        return CriterionVerdict::Fails;
    }
    let f = seq.minimal_face();
    let ok = fam.perturbed_indices().iter().all(|&k| {
        let d = fam.delta(k).with_prec(f.prec());
        let cut = tol * &d.max_abs().max(&MpScalar::one(f.prec()));
        f.contains_in_perp(&d, &cut)
    });
    if ok {
        CriterionVerdict::Holds
    } else {
        CriterionVerdict::Fails
    }
}

/// Orthonormalizes `vs` in place order, dropping dependent vectors.
fn orthonormal(vs: Vec<Vec<MpScalar>>, tol: &MpScalar) -> Vec<Vec<MpScalar>> {
    let mut out: Vec<Vec<MpScalar>> = Vec::new();
    for mut v in vs {
        let size = norm_vec(&v);
        for _ in 0..2 {
            for q in &out {
                let c = dot_vec(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    vi.sub_mul(&c, qi);
                }
            }
        }
        let rest = norm_vec(&v);
        if rest.is_zero() || rest <= tol * &size {
            continue;
        }
        out.push(v.iter().map(|x| x / &rest).collect());
    }
    out
}

/// For each certificate `i`, whether `Σ_k ŷ^i_k D_k ∈ L_i + F_{i−1}^⊥`, where
/// `L_i` is spanned by `qqᵀ` over eigenvectors `q` of `Û^i` with positive
/// eigenvalue. The test runs on the residual block of `F_{i−1}`, where
/// `F_{i−1}^⊥` vanishes and `qqᵀ` becomes `ppᵀ` with `p = P₃ᵀq`.
pub fn invariance_by_eigenspan(
    seq: &FacialReductionResult,
    fam: &PerturbedFamily,
    tol: &MpScalar,
) -> CriterionVerdict {
    let prec = seq.minimal_face().prec();
    let one = MpScalar::one(prec);
    let eig_tol = MpScalar::pow2(prec, -(prec as i32));
    for (i, cert) in seq.certificates.iter().enumerate() {
        let f = &seq.faces[i];
        let mut g = BlockMatrix::zeros(prec, &fam.base.block_dims);
        for k in fam.perturbed_indices() {
            g.axpy(
                &cert.y[k - 1].with_prec(prec),
                &fam.delta(k).with_prec(prec),
            );
        }
        let g_red = f.reduce(&g);
        let scale = g.max_abs().max(&one);
        for (b, u) in cert.u.blocks.iter().enumerate() {
            if f.r[b] == 0 || g_red[b].max_abs() <= tol * &scale {
                continue;
            }
            let eig = match sym_eig(&u.symmetrize(), &eig_tol) {
                Ok(e) => e,
                Err(_) => return CriterionVerdict::Fails,
            };
            let top = eig.max_eigenvalue().cloned().unwrap_or_else(|| one.clone());
            let cut = tol * &top.max(&one);
            let p3 = f.residual_basis(b);
            let spans: Vec<Vec<MpScalar>> = eig
                .eigenvalues
                .iter()
                .enumerate()
                .filter(|(_, l)| **l > cut)
                .map(|(l, _)| {
                    let q = eig.eigenvectors.column(l);
                    let p = p3.transpose().mul_vec(&q);
                    let pcol = MpMatrix::column_vector(prec, &p);
                    pcol.matmul(&pcol.transpose()).vec()
                })
                .collect();
            let basis = orthonormal(spans, &default_rank_tol(prec));
            let mut rest = g_red[b].vec();
            for q in &basis {
                let c = dot_vec(q, &rest);
                for (ri, qi) in rest.iter_mut().zip(q) {
                    ri.sub_mul(&c, qi);
                }
            }
            if norm_vec(&rest) > tol * &scale {
                return CriterionVerdict::Fails;
            }
        }
    }
    CriterionVerdict::Holds
}

/// Whether `D_k = w_k E` for one matrix `E` with `w ⟂ ŷ^i` for every `i`.
pub fn invariance_by_proportionality(
    seq: &FacialReductionResult,
    fam: &PerturbedFamily,
    tol: &MpScalar,
) -> CriterionVerdict {
    let m = fam.base.m;
    let prec = fam.base.prec();
    let rows: Vec<MpMatrix> = (1..=m)
        .map(|k| {
            let v = fam.delta(k).vec();
            MpMatrix::from_row_major(prec, 1, v.len(), v).expect("row shape")
        })
        .collect();
    let rank = numeric_rank(&rows, &default_rank_tol(prec)).expect("equal shapes");
    if rank == 0 {
        return CriterionVerdict::Holds;
    }
    if rank > 1 {
        return CriterionVerdict::NotFactorable;
    }
    let lead = rows
        .iter()
        .max_by(|a, b| {
            a.frobenius_norm()
                .partial_cmp(&b.frobenius_norm())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("m ≥ 1")
        .vec();
    let lead_sq = dot_vec(&lead, &lead);
    let w: Vec<MpScalar> = rows
        .iter()
        .map(|r| &dot_vec(&r.vec(), &lead) / &lead_sq)
        .collect();
    let wn = norm_vec(&w);
    let orthogonal = seq.certificates.iter().all(|c| {
        let y: Vec<MpScalar> = c.y.iter().map(|x| x.with_prec(prec)).collect();
        dot_vec(&w, &y).abs() <= tol * &(&wn * &norm_vec(&y))
    });
    if orthogonal {
        CriterionVerdict::Holds
    } else {
        CriterionVerdict::Fails
    }
}
