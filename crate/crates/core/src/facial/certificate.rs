use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::ipm::{solve, SolveStatus};
use crate::mpla::{dot_vec, norm_vec, pseudoinverse, sym_eig, MpMatrix, MpScalar};
use crate::sdpmodel::{BlockMatrix, SdpProblem};

use super::{Face, FacialConfig, FacialError};

/// `(y, U, V)` with `bᵀy = 0`, `−Σ y_k A_k = U + V`, `U ⪰ 0`, `V ∈ F^⊥`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducingCertificate {
    pub y: Vec<MpScalar>,
    pub u: BlockMatrix,
    pub v: BlockMatrix,
}

#[derive(Clone, Debug)]
pub enum Discriminant {
    Certificate(ReducingCertificate),
    NoneFound,
}

/// Result of `sup −s` over `{y : Cy = rhs, W(y) + sI ⪰ 0}`.
pub(super) enum AuxOutcome {
    Point {
        y: Vec<MpScalar>,
        s: MpScalar,
    },
    Unbounded,
    /// `Cy = rhs` has no solution.
    Empty,
}

/// `(QᵀA_kQ)₃` on the active blocks, `k = 1..m`, with entries at most
/// `tol·max(1, max_k ‖A_k‖_max)` set to zero.
///
/// Earlier certificates are only accurate to well below `tol`; the snapping
/// keeps their rounding from posing as new search directions.
pub(super) fn reduced_data(prob: &SdpProblem, f: &Face, tol: &MpScalar) -> Vec<Vec<MpMatrix>> {
    let prec = prob.prec();
    let mut amax = MpScalar::one(prec);
    for a in &prob.a[1..] {
        amax = amax.max(&a.max_abs());
    }
    let cut = tol * &amax;
    let active = f.active_blocks();
    (1..=prob.m)
        .map(|k| {
            let red = f.reduce(&prob.a[k]);
            active.iter().map(|&b| snap(&red[b], &cut)).collect()
        })
        .collect()
}

fn snap(m: &MpMatrix, cut: &MpScalar) -> MpMatrix {
    let mut out = m.clone();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if m[(i, j)].abs() <= *cut {
                out[(i, j)] = MpScalar::zero(m.prec());
            }
        }
    }
    out
}

/// `−Σ y_k B_k` per active block.
pub(super) fn combine(data: &[Vec<MpMatrix>], dims: &[usize], y: &[MpScalar]) -> Vec<MpMatrix> {
    let prec = y.first().map_or(64, |v| v.prec());
    let mut w: Vec<MpMatrix> = dims.iter().map(|&n| MpMatrix::zeros(prec, n, n)).collect();
    for (bk, yk) in data.iter().zip(y) {
        if yk.is_zero() {
            continue;
        }
        let neg = -yk;
        for (wb, b) in w.iter_mut().zip(bk) {
            wb.axpy(&neg, b);
        }
    }
    w
}

/// Orthonormal basis of the complement of `span(rows)` in `R^m`.
fn null_basis(rows: &[Vec<MpScalar>], m: usize, prec: u32) -> Vec<Vec<MpScalar>> {
    let tol = MpScalar::pow2(prec, -((prec / 2) as i32));
    let mut basis: Vec<Vec<MpScalar>> = Vec::new();
    let mut null = Vec::new();
    let unit = |i: usize| -> Vec<MpScalar> {
        (0..m)
            .map(|j| MpScalar::from_i64(prec, (i == j) as i64))
            .collect()
    };
    let candidates = rows
        .iter()
        .cloned()
        .map(|r| (r, true))
        .chain((0..m).map(|i| (unit(i), false)));
    for (mut v, from_rows) in candidates {
        let size = norm_vec(&v);
        if size.is_zero() {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let c = dot_vec(q, &v);
                for (vi, qi) in v.iter_mut().zip(q) {
                    vi.sub_mul(&c, qi);
                }
            }
        }
        let rest = norm_vec(&v);
        if rest <= &tol * &size {
            continue;
        }
        for vi in v.iter_mut() {
            *vi = &*vi / &rest;
        }
        basis.push(v.clone());
        if !from_rows {
            null.push(v);
        }
    }
    null
}

/// Random orthogonal recombination of `basis`.
fn mix(basis: Vec<Vec<MpScalar>>, seed: u64, prec: u32) -> Vec<Vec<MpScalar>> {
    let d = basis.len();
    if d < 2 {
        return basis;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cols: Vec<Vec<MpScalar>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut c: Vec<MpScalar> = (0..d)
            .map(|_| MpScalar::from_f64(prec, rng.gen_range(-1.0..1.0)))
            .collect();
        for q in &cols {
            let a = dot_vec(q, &c);
            for (ci, qi) in c.iter_mut().zip(q) {
                ci.sub_mul(&a, qi);
            }
        }
        let n = norm_vec(&c);
        if n.to_f64() < 1e-3 {
            continue;
        }
        cols.push(c.iter().map(|x| x / &n).collect());
    }
    let m = basis[0].len();
    cols.iter()
        .map(|c| {
            let mut v = vec![MpScalar::zero(prec); m];
            for (coef, b) in c.iter().zip(&basis) {
                for (vi, bi) in v.iter_mut().zip(b) {
                    vi.add_mul(coef, bi);
                }
            }
            v
        })
        .collect()
}

/// Maximizes `−s` subject to `C y = rhs`, `W(y) + sI ⪰ 0` on the active
/// blocks, parametrizing `y = y_p + N z` with a seeded random basis `N`.
pub(super) fn aux_search(
    data: &[Vec<MpMatrix>],
    dims: &[usize],
    rows: &[Vec<MpScalar>],
    rhs: &[MpScalar],
    cfg: &FacialConfig,
) -> Result<AuxOutcome, FacialError> {
    let prec = cfg.precision_bits;
    let m = data.len();
    let c = MpMatrix::from_fn(prec, rows.len(), m, |i, j| rows[i][j].clone());
    let pinv = pseudoinverse(&c, &MpScalar::pow2(prec, -((prec / 2) as i32)))?;
    let yp = pinv.mul_vec(rhs);
    let back = c.mul_vec(&yp);
    let mut miss = MpScalar::zero(prec);
    for (a, b) in back.iter().zip(rhs) {
        miss = miss.max(&(a - b).abs());
    }
    if miss > cfg.cert_tol {
        return Ok(AuxOutcome::Empty);
    }
    let null = mix(null_basis(rows, m, prec), cfg.seed, prec);
    let wp = combine(data, dims, &yp);
    if null.is_empty() {
        let mut s = MpScalar::zero(prec);
        for w in &wp {
            let eig = sym_eig(w, &MpScalar::pow2(prec, -(prec as i32)))?;
            s = s.max(&-eig.min_eigenvalue().expect("nonempty"));
        }
        return Ok(AuxOutcome::Point { y: yp, s });
    }
    let d = null.len();
    let mut a = Vec::with_capacity(d + 2);
    a.push(BlockMatrix::new(wp));
    for n in &null {
        a.push(BlockMatrix::new(combine(data, dims, n)).neg());
    }
    a.push(BlockMatrix::identity(prec, dims).neg());
    let mut b = vec![MpScalar::zero(prec); d + 1];
    b[d] = MpScalar::from_i64(prec, -1);
    let aux = SdpProblem::new(dims.to_vec(), a, b).map_err(crate::ipm::IpmError::from)?;
    let report = solve(&aux, &cfg.solver())?;
    match report.status {
        SolveStatus::Optimal => {}
        SolveStatus::Unbounded => return Ok(AuxOutcome::Unbounded),
        // A stalled run still decides the search when its bounds already
        // place the optimal shift on one side of the threshold.
        SolveStatus::NumericalBreakdown | SolveStatus::IterationCap
            if report.solution.primal_residual(&aux) <= cfg.cert_tol
                && report.solution.dual_residual(&aux) <= cfg.cert_tol
                && (report.solution.dual_obj < -&cfg.cert_tol
                    || report.solution.primal_obj >= -&cfg.cert_tol) =>
        {
            log::debug!(
                "auxiliary solve stalled at {}; bounds are conclusive",
                report.status
            );
            if report.solution.dual_obj < -&cfg.cert_tol {
                return Ok(AuxOutcome::Point {
                    y: yp,
                    s: -&report.solution.dual_obj,
                });
            }
        }
        status => {
            return Err(FacialError::SolverFailure {
                status,
                completed: 0,
                partial: None,
            })
        }
    }
    let z = &report.solution.y;
    let mut y = yp;
    for (zj, n) in z[..d].iter().zip(&null) {
        for (yi, ni) in y.iter_mut().zip(n) {
            yi.add_mul(zj, ni);
        }
    }
    Ok(AuxOutcome::Point { y, s: z[d].clone() })
}

/// Projects `y` onto `{y : bᵀy = 0, W(y)κ = 0}` where `κ` ranges over the
/// near-null eigenvectors of `W(y)`.
///
/// Interior-point iterates are only accurate to about `√μ` along degenerate
/// directions; an exact certificate annihilates the kernel of its own `W`,
/// so this removes the drift without moving the face.
fn polish(
    data: &[Vec<MpMatrix>],
    dims: &[usize],
    b: &[MpScalar],
    y: Vec<MpScalar>,
    tol: &MpScalar,
) -> Result<Vec<MpScalar>, FacialError> {
    let prec = tol.prec();
    let m = y.len();
    let w = combine(data, dims, &y);
    let mut rows: Vec<Vec<MpScalar>> = vec![b.to_vec()];
    for (blk, wb) in w.iter().enumerate() {
        let eig = sym_eig(&wb.symmetrize(), &MpScalar::pow2(prec, -(prec as i32)))?;
        let top = eig
            .max_eigenvalue()
            .expect("nonempty")
            .max(&MpScalar::one(prec));
        let cut = tol * &top;
        for (l, lam) in eig.eigenvalues.iter().enumerate() {
            if lam.abs() > cut {
                continue;
            }
            let kappa = eig.eigenvectors.column(l);
            let images: Vec<Vec<MpScalar>> =
                data.iter().map(|bk| bk[blk].mul_vec(&kappa)).collect();
            for i in 0..dims[blk] {
                rows.push((0..m).map(|k| -&images[k][i]).collect());
            }
        }
    }
    let l = MpMatrix::from_fn(prec, rows.len(), m, |i, k| rows[i][k].clone());
    // Directions that `L` barely sees are left alone: `y` itself is one.
    let pinv = pseudoinverse(&l, tol)?;
    let shift = pinv.mul_vec(&l.mul_vec(&y));
    Ok(y.iter().zip(&shift).map(|(a, d)| a - d).collect())
}

/// Searches for a reducing certificate of `prob`'s dual relative to `f`.
///
/// The auxiliary problem fixes `bᵀy = 0` and `tr W(y) = 1` for
/// `W(y) = −Σ y_k (QᵀA_kQ)₃` and pushes `λ_min(W)` up; a certificate exists
/// when the optimal shift is at most `cert_tol`. `U` is the lifted PSD part
/// of `W` and `V` the remainder.
pub fn solve_discriminant(
    prob: &SdpProblem,
    f: &Face,
    cfg: &FacialConfig,
) -> Result<Discriminant, FacialError> {
    let prec = cfg.precision_bits;
    let prob = prob.with_prec(prec);
    let active = f.active_blocks();
    if active.is_empty() || prob.m == 0 {
        return Ok(Discriminant::NoneFound);
    }
    let dims: Vec<usize> = active.iter().map(|&b| f.r[b]).collect();
    let data = reduced_data(&prob, f, &cfg.cert_tol);
    let trace_row: Vec<MpScalar> = data
        .iter()
        .map(|bk| {
            let mut t = MpScalar::zero(prec);
            for m in bk {
                t -= m.trace();
            }
            t
        })
        .collect();
    let rows = vec![prob.b.clone(), trace_row];
    let rhs = vec![MpScalar::zero(prec), MpScalar::one(prec)];
    let (y, s) = match aux_search(&data, &dims, &rows, &rhs, cfg)? {
        AuxOutcome::Point { y, s } => (y, s),
        AuxOutcome::Empty => return Ok(Discriminant::NoneFound),
        AuxOutcome::Unbounded => {
            log::warn!("discriminant search unbounded despite trace normalization");
            return Ok(Discriminant::NoneFound);
        }
    };
    if s > cfg.cert_tol {
        return Ok(Discriminant::NoneFound);
    }
    let y = polish(&data, &dims, &prob.b, y, &cfg.cert_tol)?;
    let w = combine(&data, &dims, &y);
    let mut top = MpScalar::zero(prec);
    let mut parts = Vec::with_capacity(w.len());
    for blk in &w {
        let eig = sym_eig(&blk.symmetrize(), &MpScalar::pow2(prec, -(prec as i32)))?;
        top = top.max(eig.max_eigenvalue().expect("nonempty"));
        parts.push(eig.psd_part());
    }
    if top < cfg.cert_tol {
        log::debug!("ambiguous certificate: max eigenvalue {top}");
        return Ok(Discriminant::NoneFound);
    }
    let u = f.lift(&parts);
    let v = prob.combination(&y).sub(&u);
    let cert = ReducingCertificate { y, u, v };
    if !verify_certificate(&prob, f, &cert, &cfg.cert_tol) {
        log::warn!("discriminant solution failed verification");
        return Ok(Discriminant::NoneFound);
    }
    Ok(Discriminant::Certificate(cert))
}

/// Checks the certificate conditions directly on the data.
///
/// Tolerances scale with `max(1, ‖y‖·max_k ‖A_k‖_max)`.
pub fn verify_certificate(
    prob: &SdpProblem,
    f: &Face,
    cert: &ReducingCertificate,
    tol: &MpScalar,
) -> bool {
    let prec = prob.prec();
    if cert.y.len() != prob.m
        || cert.u.dims() != prob.block_dims
        || cert.v.dims() != prob.block_dims
        || f.dims() != prob.block_dims
    {
        return false;
    }
    let one = MpScalar::one(prec);
    let ynorm = norm_vec(&cert.y);
    let mut amax = MpScalar::zero(prec);
    for a in &prob.a[1..] {
        amax = amax.max(&a.max_abs());
    }
    let scale = (&ynorm * &amax).max(&one);
    let cut = tol * &scale;

    let by = dot_vec(&prob.b, &cert.y).abs();
    if by > tol * &(&norm_vec(&prob.b) * &ynorm).max(&one) {
        return false;
    }
    let split = prob.combination(&cert.y).sub(&cert.u).sub(&cert.v);
    if split.max_abs() > cut {
        return false;
    }
    for blk in &cert.u.blocks {
        if blk.asymmetry() > cut {
            return false;
        }
        if blk.rows() == 0 {
            continue;
        }
        match sym_eig(&blk.symmetrize(), &MpScalar::pow2(prec, -(prec as i32))) {
            Ok(e) if *e.min_eigenvalue().expect("nonempty") >= -&cut => {}
            _ => return false,
        }
    }
    if !f.contains_in_perp(&cert.v, &cut) {
        return false;
    }
    f.reduce(&cert.u).iter().any(|m| m.max_abs() > cut)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::expprimal;
    use crate::mpla::default_cert_tol;

    const P: u32 = 256;

    fn ys(v: &[i64]) -> Vec<MpScalar> {
        v.iter().map(|&x| MpScalar::from_i64(P, x)).collect()
    }

    fn first_certificate() -> ReducingCertificate {
        let mut u = BlockMatrix::zeros(P, &[6, 2]);
        u.blocks[0][(0, 0)] = MpScalar::from_i64(P, 2);
        u.blocks[1][(0, 0)] = MpScalar::one(P);
        ReducingCertificate {
            y: ys(&[1, 0, 0, -1, 0, 0]),
            u,
            v: BlockMatrix::zeros(P, &[6, 2]),
        }
    }

    #[test]
    fn first_certificate_verifies() {
        let prob = expprimal(P);
        let f = Face::whole(P, &prob.block_dims);
        let tol = default_cert_tol(P);
        let cert = first_certificate();
        assert!(verify_certificate(&prob, &f, &cert, &tol));
        let flipped = ReducingCertificate {
            y: cert.y.iter().map(|x| -x).collect(),
            u: cert.u.neg(),
            v: cert.v.clone(),
        };
        assert!(!verify_certificate(&prob, &f, &flipped, &tol));
        let mut moved = cert.clone();
        moved.y[5] = MpScalar::one(P);
        assert!(!verify_certificate(&prob, &f, &moved, &tol));
    }

    #[test]
    fn null_basis_is_orthonormal_complement() {
        let rows = vec![ys(&[1, 1, 0]), ys(&[2, 2, 0])];
        let n = null_basis(&rows, 3, P);
        assert_eq!(n.len(), 2);
        for v in &n {
            assert!(dot_vec(v, &rows[0]).abs().to_f64() < 1e-70);
            assert!((norm_vec(v).to_f64() - 1.0).abs() < 1e-70);
        }
        let mixed = mix(n.clone(), 7, P);
        assert!(dot_vec(&mixed[0], &mixed[1]).abs().to_f64() < 1e-70);
    }
}
