use crate::mpla::{
    cholesky, cholesky_solve, default_rank_tol, dot_vec, spd_inverse_from_factor, MpMatrix,
    MpScalar,
};
use crate::sdpmodel::{BlockMatrix, SdpProblem, SolutionPair};

use super::{relative_gap, IpmError, IterationRecord, SolveReport, SolveStatus, SolverConfig};

type Sparse = Vec<(usize, usize, usize, MpScalar)>;

/// `Σ v·N[b](i,j)` over the stored entries of a sparse symmetric matrix.
fn sparse_dot(a: &Sparse, n: &BlockMatrix, prec: u32) -> MpScalar {
    let mut acc = MpScalar::zero(prec);
    for (b, i, j, v) in a {
        acc.add_mul(v, &n.blocks[*b][(*i, *j)]);
    }
    acc
}

fn sparse_axpy(target: &mut BlockMatrix, alpha: &MpScalar, a: &Sparse) {
    for (b, i, j, v) in a {
        target.blocks[*b][(*i, *j)].add_mul(alpha, v);
    }
}

fn blockwise(a: &BlockMatrix, b: &BlockMatrix) -> BlockMatrix {
    BlockMatrix::new(
        a.blocks
            .iter()
            .zip(&b.blocks)
            .map(|(x, y)| x.matmul(y))
            .collect(),
    )
}

fn is_pd(v: &BlockMatrix) -> bool {
    v.blocks
        .iter()
        .all(|b| b.rows() == 0 || cholesky(b).is_ok())
}

fn shifted(v: &BlockMatrix, alpha: &MpScalar, dv: &BlockMatrix) -> BlockMatrix {
    let mut out = v.clone();
    out.axpy(alpha, dv);
    out
}

/// `min(1, γ·α_max)` where `α_max` is the largest step keeping `V + α dV`
/// positive definite. Found by bracketing and bisection with Cholesky.
fn step_length(v: &BlockMatrix, dv: &BlockMatrix, gamma: &MpScalar) -> MpScalar {
    let prec = gamma.prec();
    let one = MpScalar::one(prec);
    let hi0 = gamma.recip();
    if is_pd(&shifted(v, &hi0, dv)) {
        return one;
    }
    let half = MpScalar::ratio(prec, 1, 2);
    let mut hi = hi0;
    let mut lo = &hi * &half;
    let mut halvings = 0;
    while !is_pd(&shifted(v, &lo, dv)) {
        hi = lo.clone();
        lo = &lo * &half;
        halvings += 1;
        if halvings > 4 * prec as usize {
            return MpScalar::zero(prec);
        }
    }
    for _ in 0..20 {
        let mid = &(&lo + &hi) * &half;
        if is_pd(&shifted(v, &mid, dv)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (gamma * &lo).min(&one)
}

/// Greedy modified Gram–Schmidt on `vec A_k`; returns the kept indices
/// (0-based) and the worst `b`-inconsistency among dropped constraints.
fn independent_constraints(prob: &SdpProblem) -> (Vec<usize>, MpScalar) {
    let prec = prob.prec();
    let tol = default_rank_tol(prec);
    let mut basis: Vec<Vec<MpScalar>> = Vec::new();
    // Each basis vector's representation as a combination of b-values.
    let mut basis_b: Vec<MpScalar> = Vec::new();
    let mut kept = Vec::new();
    let mut worst = MpScalar::zero(prec);
    for k in 0..prob.m {
        let v = prob.a[k + 1].vec();
        let norm = dot_vec(&v, &v).sqrt();
        if norm.is_zero() {
            worst = worst.max(&prob.b[k].abs());
            continue;
        }
        let mut r = v.clone();
        let mut rb = prob.b[k].clone();
        for _ in 0..2 {
            for (q, qb) in basis.iter().zip(&basis_b) {
                let c = dot_vec(q, &r);
                for (ri, qi) in r.iter_mut().zip(q) {
                    ri.sub_mul(&c, qi);
                }
                rb.sub_mul(&c, qb);
            }
        }
        let rn = dot_vec(&r, &r).sqrt();
        if rn > &tol * &norm {
            let inv = rn.recip();
            basis.push(r.iter().map(|x| x * &inv).collect());
            basis_b.push(&rb * &inv);
            kept.push(k);
        } else {
            let scale = prob.b[k].abs().max(&MpScalar::one(prec));
            worst = worst.max(&(&rb.abs() / &scale));
        }
    }
    (kept, worst)
}

struct Iterate {
    x: BlockMatrix,
    y: Vec<MpScalar>,
    z: BlockMatrix,
}

struct Direction {
    dx: BlockMatrix,
    dy: Vec<MpScalar>,
    dz: BlockMatrix,
}

struct Step<'a> {
    sparse: &'a [Sparse],
    kept: &'a [usize],
    x: &'a BlockMatrix,
    zinv: &'a BlockMatrix,
    rd: &'a BlockMatrix,
    x_rd_zinv: &'a BlockMatrix,
    p: &'a [MpScalar],
    schur: &'a MpMatrix,
    prec: u32,
}

impl Step<'_> {
    /// Direction for the complementarity target `rc` (possibly non-symmetric).
    fn direction(&self, rc: &BlockMatrix, m_total: usize) -> Direction {
        let h = rc.sub(self.x_rd_zinv);
        let rhs: Vec<MpScalar> = self
            .kept
            .iter()
            .zip(self.p)
            .map(|(&k, pk)| pk - &sparse_dot(&self.sparse[k], &h, self.prec))
            .collect();
        let dy_kept = cholesky_solve(self.schur, &rhs);
        let mut dz = self.rd.clone();
        let mut dy = vec![MpScalar::zero(self.prec); m_total];
        for (&k, v) in self.kept.iter().zip(&dy_kept) {
            sparse_axpy(&mut dz, &-v, &self.sparse[k]);
            dy[k] = v.clone();
        }
        let dx = rc
            .sub(&blockwise(&blockwise(self.x, &dz), self.zinv))
            .symmetrize();
        Direction { dx, dy, dz }
    }
}

/// Solves the pair `(P)/(D)` of `prob` with `cfg`.
///
/// Non-optimal exits still carry the last interior iterate.
pub fn solve(prob: &SdpProblem, cfg: &SolverConfig) -> Result<SolveReport, IpmError> {
    cfg.validate()?;
    prob.validate()?;
    let prec = cfg.precision_bits;
    let prob = prob.with_prec(prec);
    let dims = prob.block_dims.clone();
    let n: usize = dims.iter().sum();
    let n_mp = MpScalar::from_i64(prec, n as i64);
    let sparse: Vec<Sparse> = prob.a[1..].iter().map(|a| a.nonzeros()).collect();

    let (kept, inconsistency) = independent_constraints(&prob);
    let mut it = Iterate {
        x: BlockMatrix::identity(prec, &dims).scale(&cfg.lambda_star),
        y: vec![MpScalar::zero(prec); prob.m],
        z: BlockMatrix::identity(prec, &dims).scale(&cfg.lambda_star),
    };
    let finish = |it: Iterate, status, iters, history, kept: Vec<usize>| {
        let mu = &it.x.dot(&it.z) / &n_mp;
        Ok(SolveReport {
            status,
            solution: SolutionPair::new(&prob, it.y, it.z, it.x),
            iterations: iters,
            final_mu: mu,
            residual_history: history,
            kept_constraints: kept,
        })
    };
    if inconsistency > crate::mpla::default_cert_tol(prec) {
        return finish(it, SolveStatus::DualInfeasibleDetected, 0, Vec::new(), kept);
    }

    let zero = MpScalar::zero(prec);
    let one = MpScalar::one(prec);
    let mut history = Vec::new();

    for iter in 0..cfg.max_iteration {
        // Residuals and objectives at the current iterate.
        let mut rd = prob.a[0].sub(&it.z);
        for (k, yk) in it.y.iter().enumerate() {
            if !yk.is_zero() {
                sparse_axpy(&mut rd, &-yk, &sparse[k]);
            }
        }
        let p: Vec<MpScalar> = kept
            .iter()
            .map(|&k| &prob.b[k] - &sparse_dot(&sparse[k], &it.x, prec))
            .collect();
        let mut full_p = zero.clone();
        for k in 0..prob.m {
            let r = &prob.b[k] - &sparse_dot(&sparse[k], &it.x, prec);
            full_p = full_p.max(&r.abs());
        }
        let primal_res = rd.max_abs();
        let dual_res = full_p;
        let pobj = prob.primal_objective(&it.y);
        let dobj = prob.dual_objective(&it.x);
        let mu = &it.x.dot(&it.z) / &n_mp;
        let primal_feasible = primal_res <= cfg.epsilon_star;
        let dual_feasible = dual_res <= cfg.epsilon_star;
        let feasible = primal_feasible && dual_feasible;

        if feasible && relative_gap(&pobj, &dobj) <= cfg.epsilon_dash {
            return finish(it, SolveStatus::Optimal, iter, history, kept);
        }
        // Objective guards, with feasibility measured relative to the objective
        // so that diverging iterates are caught.
        if pobj > cfg.upper_bound && primal_res <= &cfg.epsilon_star * &pobj.abs() {
            return finish(it, SolveStatus::Unbounded, iter, history, kept);
        }
        if dobj < cfg.lower_bound && dual_res <= &cfg.epsilon_star * &dobj.abs() {
            return finish(
                it,
                SolveStatus::PrimalInfeasibleDetected,
                iter,
                history,
                kept,
            );
        }

        let zinv = match it
            .z
            .blocks
            .iter()
            .map(|b| cholesky(b).map(|l| spd_inverse_from_factor(&l)))
            .collect::<Result<Vec<_>, _>>()
        {
            Ok(v) => BlockMatrix::new(v),
            Err(_) => return finish(it, SolveStatus::NumericalBreakdown, iter, history, kept),
        };

        // Schur complement M_kj = A_k • (X A_j Z⁻¹).
        let mk = kept.len();
        let mut schur = MpMatrix::zeros(prec, mk, mk);
        for (cj, &j) in kept.iter().enumerate() {
            let mut g = BlockMatrix::zeros(prec, &dims);
            let mut touched = vec![false; dims.len()];
            let mut xa = BlockMatrix::zeros(prec, &dims);
            for (b, d, e, v) in &sparse[j] {
                touched[*b] = true;
                let xb = &it.x.blocks[*b];
                let t = &mut xa.blocks[*b];
                for r in 0..xb.rows() {
                    t[(r, *e)].add_mul(v, &xb[(r, *d)]);
                }
            }
            for (b, on) in touched.iter().enumerate() {
                if *on {
                    g.blocks[b] = xa.blocks[b].matmul(&zinv.blocks[b]);
                }
            }
            for (ck, &k) in kept.iter().enumerate() {
                schur[(ck, cj)] = sparse_dot(&sparse[k], &g, prec);
            }
        }
        let schur = schur.symmetrize();
        let chol = match cholesky(&schur) {
            Ok(l) => l,
            Err(_) => return finish(it, SolveStatus::NumericalBreakdown, iter, history, kept),
        };

        let x_rd_zinv = blockwise(&blockwise(&it.x, &rd), &zinv);
        let step = Step {
            sparse: &sparse,
            kept: &kept,
            x: &it.x,
            zinv: &zinv,
            rd: &rd,
            x_rd_zinv: &x_rd_zinv,
            p: &p,
            schur: &chol,
            prec,
        };

        // Predictor.
        let sigma_p = if feasible {
            zero.clone()
        } else {
            cfg.beta_bar.clone()
        };
        let rc_p = zinv.scale(&(&sigma_p * &mu)).sub(&it.x);
        let pred = step.direction(&rc_p, prob.m);
        let ap = step_length(&it.x, &pred.dx, &cfg.gamma_star);
        let ad = step_length(&it.z, &pred.dz, &cfg.gamma_star);
        let mu_aff = &shifted(&it.x, &ap, &pred.dx).dot(&shifted(&it.z, &ad, &pred.dz)) / &n_mp;
        let ratio = &mu_aff / &mu;
        let floor = if feasible {
            &cfg.beta_star
        } else {
            &cfg.beta_bar
        };
        let sigma_c = ratio.square().max(floor).min(&one);

        // Corrector.
        let second = blockwise(&blockwise(&pred.dx, &pred.dz), &zinv);
        let rc_c = zinv.scale(&(&sigma_c * &mu)).sub(&it.x).sub(&second);
        let corr = step.direction(&rc_c, prob.m);
        let ap = step_length(&it.x, &corr.dx, &cfg.gamma_star);
        let ad = step_length(&it.z, &corr.dz, &cfg.gamma_star);
        if ap.is_zero() && ad.is_zero() {
            return finish(it, SolveStatus::NumericalBreakdown, iter, history, kept);
        }

        it.x.axpy(&ap, &corr.dx);
        it.z.axpy(&ad, &corr.dz);
        for (yk, dyk) in it.y.iter_mut().zip(&corr.dy) {
            yk.add_mul(&ad, dyk);
        }
        it.x = it.x.symmetrize();
        it.z = it.z.symmetrize();
        if !is_pd(&it.x) || !is_pd(&it.z) {
            return finish(it, SolveStatus::NumericalBreakdown, iter + 1, history, kept);
        }

        history.push(IterationRecord {
            iteration: iter + 1,
            mu: mu.to_f64(),
            primal_residual: primal_res.to_f64(),
            dual_residual: dual_res.to_f64(),
            primal_obj: pobj.to_f64(),
            dual_obj: dobj.to_f64(),
            step_primal: ap.to_f64(),
            step_dual: ad.to_f64(),
        });
    }
    let iters = cfg.max_iteration;
    finish(it, SolveStatus::IterationCap, iters, history, kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 256;

    fn scalar_problem(a0: i64, a1: i64, b1: i64) -> SdpProblem {
        let m = |v| BlockMatrix::new(vec![MpMatrix::from_i64_rows(P, &[&[v]])]);
        SdpProblem::new(vec![1], vec![m(a0), m(a1)], vec![MpScalar::from_i64(P, b1)]).unwrap()
    }

    #[test]
    fn trivial_scalar_problem() {
        // inf x s.t. x = 1, x ≥ 0.
        let prob = scalar_problem(1, 1, 1);
        let cfg = SolverConfig::reference_at(P, "1.0e-30");
        let r = solve(&prob, &cfg).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.solution.dual_obj.to_f64() - 1.0).abs() < 1e-25);
        assert!((r.solution.primal_obj.to_f64() - 1.0).abs() < 1e-25);
    }

    #[test]
    fn two_by_two_eigenvalue_problem() {
        // sup y s.t. A₀ − y I ⪰ 0: value is λ_min(A₀) = 1.
        let a0 = BlockMatrix::new(vec![MpMatrix::from_i64_rows(P, &[&[2, 1], &[1, 2]])]);
        let a1 = BlockMatrix::identity(P, &[2]);
        let prob = SdpProblem::new(vec![2], vec![a0, a1], vec![MpScalar::one(P)]).unwrap();
        let r = solve(&prob, &SolverConfig::reference_at(P, "1.0e-40")).unwrap();
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.solution.primal_obj.to_f64() - 1.0).abs() < 1e-30);
        let mut prev = f64::INFINITY;
        for h in &r.residual_history {
            if h.primal_residual < 1e-40 && h.dual_residual < 1e-40 {
                assert!(h.mu < prev);
                prev = h.mu;
            }
        }
        assert!(prev < 1e-30);
    }

    #[test]
    fn dependent_constraints_are_dropped() {
        let m = |v| BlockMatrix::new(vec![MpMatrix::from_i64_rows(P, &[&[v]])]);
        let prob = SdpProblem::new(
            vec![1],
            vec![m(1), m(1), m(2)],
            vec![MpScalar::from_i64(P, 1), MpScalar::from_i64(P, 2)],
        )
        .unwrap();
        let r = solve(&prob, &SolverConfig::reference_at(P, "1.0e-30")).unwrap();
        assert_eq!(r.kept_constraints, vec![0]);
        assert_eq!(r.status, SolveStatus::Optimal);

        let bad = SdpProblem::new(
            vec![1],
            vec![m(1), m(1), m(2)],
            vec![MpScalar::from_i64(P, 1), MpScalar::from_i64(P, 3)],
        )
        .unwrap();
        let r = solve(&bad, &SolverConfig::reference_at(P, "1.0e-30")).unwrap();
        assert_eq!(r.status, SolveStatus::DualInfeasibleDetected);
    }

    #[test]
    fn unbounded_primal_is_flagged() {
        // sup y s.t. 1 + y ≥ 0 is unbounded above.
        let prob = scalar_problem(1, -1, 1);
        let r = solve(&prob, &SolverConfig::reference_at(P, "1.0e-30")).unwrap();
        assert_eq!(r.status, SolveStatus::Unbounded);
    }

    #[test]
    fn infeasible_primal_is_flagged() {
        // (P) needs −1 ⪰ 0 in the first diagonal entry; (D) is unbounded below.
        let prob = SdpProblem::new(
            vec![2],
            vec![
                BlockMatrix::new(vec![MpMatrix::from_i64_rows(P, &[&[-1, 0], &[0, 1]])]),
                BlockMatrix::new(vec![MpMatrix::from_i64_rows(P, &[&[0, 0], &[0, 1]])]),
            ],
            vec![MpScalar::zero(P)],
        )
        .unwrap();
        let r = solve(&prob, &SolverConfig::reference_at(P, "1.0e-30")).unwrap();
        assert_eq!(r.status, SolveStatus::PrimalInfeasibleDetected);
    }
}
