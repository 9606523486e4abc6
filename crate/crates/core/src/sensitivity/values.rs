use serde::Serialize;

use crate::fixtures::{expprimal, perturbed, Perturbation};
use crate::mpla::{sym_eig, MpMatrix, MpScalar};
use crate::sdpmodel::{BlockMatrix, SdpProblem};

#[derive(Clone, Debug, Serialize)]
pub struct ValueCheck {
    pub name: String,
    pub passed: bool,
    /// Size of the worst violated quantity.
    pub error: f64,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ValueCertificateReport {
    pub checks: Vec<ValueCheck>,
}

impl ValueCertificateReport {
    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&ValueCheck> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

fn min_eig(m: &MpMatrix) -> MpScalar {
    let prec = m.prec();
    sym_eig(&m.symmetrize(), &MpScalar::pow2(prec, -(prec as i32)))
        .expect("symmetric input")
        .min_eigenvalue()
        .expect("nonempty")
        .clone()
}

fn check(name: String, err: MpScalar, tol: &MpScalar, detail: String) -> ValueCheck {
    ValueCheck {
        name,
        passed: err <= *tol,
        error: err.to_f64(),
        detail,
    }
}

/// `(n, 0, 0, −n, γ/4, −γ + 1/n)` with `γ = −√5`: slack PSD and
/// objective `γ − 1/n`.
fn sequence_point(prob: &SdpProblem, n: i64, tol: &MpScalar) -> ValueCheck {
    let prec = prob.prec();
    let gamma = -MpScalar::from_i64(prec, 5).sqrt();
    let inv = MpScalar::ratio(prec, 1, n);
    let y = vec![
        MpScalar::from_i64(prec, n),
        MpScalar::zero(prec),
        MpScalar::zero(prec),
        MpScalar::from_i64(prec, -n),
        &gamma / &MpScalar::from_i64(prec, 4),
        &(-&gamma) + &inv,
    ];
    let mut worst = MpScalar::zero(prec);
    for blk in &prob.slack(&y).blocks {
        worst = worst.max(&(-min_eig(blk)));
    }
    let obj_err = (&prob.primal_objective(&y) - &(&gamma - &inv)).abs();
    let err = worst.max(&obj_err);
    check(
        format!("sequence point n = {n}"),
        err,
        tol,
        format!(
            "PSD violation {:e}, objective error {:e}",
            worst.to_f64(),
            obj_err.to_f64()
        ),
    )
}

/// `X₁ = w wᵀ / 10`, `w = (0, −4, 1, −2, √5, 0)`, with `X₂ = diag(0, 4)`.
fn rank_one_dual(prob: &SdpProblem, tol: &MpScalar) -> Vec<ValueCheck> {
    let prec = prob.prec();
    let root5 = MpScalar::from_i64(prec, 5).sqrt();
    let w = [
        MpScalar::zero(prec),
        MpScalar::from_i64(prec, -4),
        MpScalar::one(prec),
        MpScalar::from_i64(prec, -2),
        root5.clone(),
        MpScalar::zero(prec),
    ];
    let tenth = MpScalar::ratio(prec, 1, 10);
    let x1 = MpMatrix::from_fn(prec, 6, 6, |i, j| &(&w[i] * &w[j]) * &tenth);
    let mut x2 = MpMatrix::zeros(prec, 2, 2);
    x2[(1, 1)] = MpScalar::from_i64(prec, 4);
    let x = BlockMatrix::new(vec![x1, x2]);
    let mut feas = MpScalar::zero(prec);
    let mut worst_k = 0;
    for (k, r) in prob.constraint_residual(&x).iter().enumerate() {
        if r.abs() > feas {
            feas = r.abs();
            worst_k = k + 1;
        }
    }
    let obj_err = (&prob.dual_objective(&x) + &root5).abs();
    vec![
        check(
            "rank-one dual point feasibility".into(),
            feas,
            tol,
            format!("worst constraint {worst_k}"),
        ),
        check(
            "rank-one dual point objective".into(),
            obj_err.clone(),
            tol,
            format!("|A0•X + √5| = {:e}", obj_err.to_f64()),
        ),
    ]
}

/// With rows 1–2 of the first block and the second block removed, the
/// perturbed dual becomes `min M•X, tr X = 1` over `S⁴₊`.
fn eigenvalue_problem(prec: u32, tol: &MpScalar) -> Vec<ValueCheck> {
    let prob = perturbed(Perturbation::P1, prec, "1e-16");
    let keep = |m: &MpMatrix| m.submatrix(2, 2, 4, 4);
    let mut rest = MpScalar::zero(prec);
    for k in 1..=prob.m {
        let red = keep(&prob.a[k].blocks[0]);
        let expected = if k == prob.m {
            MpMatrix::identity(prec, 4).neg()
        } else {
            MpMatrix::zeros(prec, 4, 4)
        };
        rest = rest.max(&red.sub(&expected).max_abs());
    }
    let m = keep(&prob.a[0].blocks[0]);
    let mut shown = MpMatrix::zeros(prec, 4, 4);
    for (i, j) in [(2, 0), (2, 1), (0, 2), (1, 2)] {
        shown[(i, j)] = MpScalar::from_i64(prec, -1);
    }
    let shape = m.add(&shown).max_abs();
    let value_err = (&min_eig(&m) + &MpScalar::from_i64(prec, 2).sqrt()).abs();
    vec![
        check(
            "reduced constraints are the trace".into(),
            rest,
            tol,
            "A_k restricted to rows 3-6: zero for k < m, −I for k = m".into(),
        ),
        check(
            "reduced objective matrix".into(),
            shape,
            tol,
            "restricted A0 equals the negated reference 4×4 matrix".into(),
        ),
        check(
            "minimum eigenvalue".into(),
            value_err.clone(),
            tol,
            format!("|λ_min + √2| = {:e}", value_err.to_f64()),
        ),
    ]
}

/// Closed-form feasibility and value checks for the H∞ reference problem
/// and its `(2,2)` perturbation.
pub fn verify_value_certificates(prec: u32, tol: &MpScalar) -> ValueCertificateReport {
    let prob = expprimal(prec);
    let mut checks: Vec<ValueCheck> = [1, 10, 100, 1000]
        .iter()
        .map(|&n| sequence_point(&prob, n, tol))
        .collect();
    checks.extend(rank_one_dual(&prob, tol));
    checks.extend(eigenvalue_problem(prec, tol));
    ValueCertificateReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_value_checks_pass() {
        let p = 512;
        let rep = verify_value_certificates(p, &MpScalar::pow2(p, -200));
        assert!(rep.ok(), "{:#?}", rep.failures());
        assert_eq!(rep.checks.len(), 9);
    }

    #[test]
    fn loose_sequence_fails_tight_tolerance() {
        let p = 256;
        let prob = expprimal(p);
        let c = sequence_point(&prob, 10, &MpScalar::zero(p));
        assert_eq!(c.passed, c.error == 0.0);
    }
}
