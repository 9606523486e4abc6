//! H∞ state-feedback synthesis as an SDP, and the plant-level rank tests
//! that decide strict feasibility of its dual.
//!
//! For a plant `(A, B₁, B₂, C₁, D₁₁, D₁₂)` the LMI in `(X₁, X₂, γ)` is
//!
//! ```text
//! [ −He(A X₁ + B₂ X₂)      *        *   ]
//! [ −C₁ X₁ − D₁₂ X₂       γ I       *   ]  ⪰ 0,   X₁ ⪰ 0,
//! [ −B₁ᵀ                 −D₁₁ᵀ     γ I  ]
//! ```
//!
//! maximizing `−γ`. Variables are ordered as the upper triangle of `X₁`
//! row by row, then `X₂` row-major, then `γ`.

mod classify;
pub mod complex;
mod plant;
mod rank;

pub use classify::{
    classify_against, classify_all, classify_face_behavior, Classification, ClassifyOptions,
    FaceBehavior,
};
pub use plant::{ControlSystem, PlantParam};
pub use rank::{
    default_grid, nonstrict_feasibility_criterion, stabilizability_check, FeasibilityVerdict,
};

use std::collections::BTreeMap;

use crate::mpla::{MpMatrix, MpScalar};
use crate::sdpmodel::{BlockMatrix, FamilyMeta, PerturbedFamily, SdpError, SdpProblem};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HinfError {
    #[error("plant dimensions are inconsistent: {0}")]
    DimensionMismatch(String),
    #[error("unknown plant parameter {0:?}")]
    UnknownParam(String),
    #[error("cannot read plant: {0}")]
    Input(String),
    #[error(transparent)]
    Model(#[from] SdpError),
}

/// Number of scalar variables `(X₁ upper triangle, X₂, γ)`.
pub fn variable_count(sys: &ControlSystem) -> usize {
    let (nx, _, nu, _) = sys.dims();
    nx * (nx + 1) / 2 + nu * nx + 1
}

/// Evaluates both LMI blocks at the given variable values.
fn lmi_blocks(sys: &ControlSystem, x: &[MpScalar]) -> BlockMatrix {
    let prec = sys.prec();
    let (nx, nw, nu, nz) = sys.dims();
    let mut x1 = MpMatrix::zeros(prec, nx, nx);
    let mut idx = 0;
    for i in 0..nx {
        for j in i..nx {
            x1[(i, j)] = x[idx].clone();
            x1[(j, i)] = x[idx].clone();
            idx += 1;
        }
    }
    let mut x2 = MpMatrix::zeros(prec, nu, nx);
    for i in 0..nu {
        for j in 0..nx {
            x2[(i, j)] = x[idx].clone();
            idx += 1;
        }
    }
    let gamma = &x[idx];

    let n = nx + nz + nw;
    let mut blk = MpMatrix::zeros(prec, n, n);
    let core = sys.a.matmul(&x1).add(&sys.b2.matmul(&x2));
    let top = core.add(&core.transpose()).neg();
    blk.set_submatrix(0, 0, &top);
    let mid = sys.c1.matmul(&x1).add(&sys.d12.matmul(&x2)).neg();
    blk.set_submatrix(nx, 0, &mid);
    blk.set_submatrix(0, nx, &mid.transpose());
    let b1t = sys.b1.transpose().neg();
    blk.set_submatrix(nx + nz, 0, &b1t);
    blk.set_submatrix(0, nx + nz, &b1t.transpose());
    let d11t = sys.d11.transpose().neg();
    blk.set_submatrix(nx + nz, nx, &d11t);
    blk.set_submatrix(nx, nx + nz, &d11t.transpose());
    for i in nx..n {
        blk[(i, i)] = gamma.clone();
    }
    BlockMatrix::new(vec![blk, x1])
}

/// The SDP `sup −γ` over the LMI above, in `(P)` form.
///
/// The constant part becomes `A₀` and the coefficient of variable `k`
/// becomes `−A_k`, so [`SdpProblem::lmi_coefficient`] returns the written
/// coefficient.
pub fn build_hinf_sdp(sys: &ControlSystem) -> Result<SdpProblem, HinfError> {
    sys.validate()?;
    let prec = sys.prec();
    let m = variable_count(sys);
    let zero = vec![MpScalar::zero(prec); m];
    let constant = lmi_blocks(sys, &zero);
    let mut a = vec![constant.clone()];
    for k in 0..m {
        let mut e = zero.clone();
        e[k] = MpScalar::one(prec);
        a.push(constant.sub(&lmi_blocks(sys, &e)));
    }
    let mut b = zero;
    b[m - 1] = MpScalar::from_i64(prec, -1);
    let dims = a[0].dims();
    Ok(SdpProblem::new(dims, a, b)?)
}

/// The family obtained by moving one plant entry: `A_k(t) = A_k + t·D_k`
/// with `D_k` the derivative of the built data in that entry.
pub fn matrixwise_family(sys: &ControlSystem, param: &str) -> Result<PerturbedFamily, HinfError> {
    let p = PlantParam::parse(param, sys)?;
    let base = build_hinf_sdp(sys)?;
    let moved = build_hinf_sdp(&sys.perturbed(p, &MpScalar::one(sys.prec())))?;
    let mut deltas = BTreeMap::new();
    for k in 0..=base.m {
        let d = moved.a[k].sub(&base.a[k]);
        if !d.is_zero() {
            deltas.insert(k, d);
        }
    }
    let meta = FamilyMeta {
        name: format!("matrixwise-{}", p.name()),
        parameter: Some(p.name()),
        ..FamilyMeta::default()
    };
    Ok(PerturbedFamily::new(base, deltas, None, meta)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: u32 = 128;

    fn lmi(prob: &SdpProblem, k: usize) -> MpMatrix {
        prob.lmi_coefficient(k).blocks[0].clone()
    }

    #[test]
    fn plant_coefficients() {
        let prob = build_hinf_sdp(&ControlSystem::reference_plant(P)).unwrap();
        assert_eq!(prob.block_dims, vec![6, 2]);
        assert_eq!(prob.m, 6);
        let f1 = lmi(&prob, 1);
        let col: Vec<f64> = (0..6).map(|i| f1[(i, 0)].to_f64()).collect();
        assert_eq!(col, vec![2.0, -1.0, -2.0, 1.0, 0.0, 0.0]);
        assert_eq!(prob.lmi_coefficient(1).blocks[1][(0, 0)].to_f64(), 1.0);
        let f5 = lmi(&prob, 5);
        assert_eq!(f5[(1, 1)].to_f64(), -2.0);
        assert_eq!(f5[(2, 1)].to_f64(), -2.0);
        assert_eq!(f5[(3, 1)].to_f64(), 1.0);
        let a0 = &prob.a[0].blocks[0];
        for (i, j) in [(4, 0), (4, 1), (4, 2), (4, 3), (5, 0)] {
            assert_eq!(a0[(i, j)].to_f64(), 1.0);
            assert_eq!(a0[(j, i)].to_f64(), 1.0);
        }
        assert_eq!(a0.frobenius_norm().square().to_f64(), 10.0);
    }

    #[test]
    fn zero_plant_keeps_only_gamma_and_constants() {
        let z = |r, c| MpMatrix::zeros(P, r, c);
        let sys = ControlSystem::new(z(2, 2), z(2, 2), z(2, 1), z(2, 2), z(2, 2), z(2, 1)).unwrap();
        let prob = build_hinf_sdp(&sys).unwrap();
        assert!(prob.a[0].is_zero());
        for k in 1..=5 {
            assert!(prob.a[k].blocks[0].entries().iter().all(|x| x.is_zero()));
        }
        let g = lmi(&prob, 6);
        for i in 0..6 {
            assert_eq!(g[(i, i)].to_f64(), if i < 2 { 0.0 } else { 1.0 });
        }
    }

    #[test]
    fn a_entry_families_match_displays() {
        let sys = ControlSystem::reference_plant(P);
        let fam = matrixwise_family(&sys, "a11").unwrap();
        assert_eq!(fam.perturbed_indices(), vec![1, 2]);
        assert_eq!(fam.lmi_delta(1).blocks[0][(0, 0)].to_f64(), -2.0);
        let e2 = fam.lmi_delta(2).blocks[0].clone();
        assert_eq!(e2[(0, 1)].to_f64(), -1.0);
        assert_eq!(e2[(1, 0)].to_f64(), -1.0);
        let fam = matrixwise_family(&sys, "a21").unwrap();
        let e1 = fam.lmi_delta(1).blocks[0].clone();
        assert_eq!(e1[(0, 1)].to_f64(), -1.0);
        assert_eq!(fam.lmi_delta(2).blocks[0][(1, 1)].to_f64(), -2.0);
        assert!(matches!(
            matrixwise_family(&sys, "q7"),
            Err(HinfError::UnknownParam(_))
        ));
    }

    #[test]
    fn family_is_the_finite_difference() {
        let sys = ControlSystem::reference_plant(P);
        let h = MpScalar::ratio(P, 1, 1024);
        for name in PlantParam::table_order() {
            let p = PlantParam::parse(name, &sys).unwrap();
            let fam = matrixwise_family(&sys, name).unwrap();
            let moved = build_hinf_sdp(&sys.perturbed(p, &h)).unwrap();
            assert_eq!(fam.apply(&h), moved, "{name}");
        }
    }

    #[test]
    fn parameter_bands() {
        let sys = ControlSystem::reference_plant(P);
        for name in ["d1", "d2", "c11", "c21"] {
            let fam = matrixwise_family(&sys, name).unwrap();
            for k in fam.perturbed_indices() {
                for (b, i, j, _) in fam.delta(k).nonzeros() {
                    assert_eq!(b, 0);
                    assert!((2..4).contains(&i.max(j)) && i.min(j) < 2, "{name}");
                }
            }
        }
        for name in ["b1", "b2"] {
            let fam = matrixwise_family(&sys, name).unwrap();
            assert_eq!(fam.perturbed_indices(), vec![4, 5]);
        }
    }
}
