//! Reference problems shared by tests, the CLI and the sweep harness.

use std::collections::BTreeMap;

use crate::hinf::{build_hinf_sdp, ControlSystem};
use crate::mpla::{MpMatrix, MpScalar};
use crate::sdpmodel::{BlockMatrix, FamilyMeta, PerturbedFamily, SdpProblem};

/// The H∞ problem of [`ControlSystem::reference_plant`].
pub fn expprimal(prec: u32) -> SdpProblem {
    build_hinf_sdp(&ControlSystem::reference_plant(prec)).expect("reference plant is consistent")
}

/// Which single-coefficient perturbation of the `x₅` coefficient.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Perturbation {
    /// Entry (2,2), written value `−2 → −2(1+ε)`.
    P1,
    /// Entries (2,3),(3,2), written value `−2 → −2(1+ε)`.
    P2,
    /// Entries (2,4),(4,2), written value `1 → 1+ε`.
    P3,
}

impl Perturbation {
    pub fn all() -> [Perturbation; 3] {
        [Perturbation::P1, Perturbation::P2, Perturbation::P3]
    }

    pub fn name(&self) -> &'static str {
        match self {
            Perturbation::P1 => "P1",
            Perturbation::P2 => "P2",
            Perturbation::P3 => "P3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "P1" => Some(Perturbation::P1),
            "P2" => Some(Perturbation::P2),
            "P3" => Some(Perturbation::P3),
            _ => None,
        }
    }
}

/// `A₅(ε) = A₅ + ε·D` where `−D` is the change of the written coefficient.
pub fn perturbation_family(which: Perturbation, prec: u32) -> PerturbedFamily {
    let base = expprimal(prec);
    let mut d = BlockMatrix::zeros(prec, &base.block_dims);
    let (entries, lmi_change): (&[(usize, usize)], i64) = match which {
        Perturbation::P1 => (&[(1, 1)], -2),
        Perturbation::P2 => (&[(1, 2), (2, 1)], -2),
        Perturbation::P3 => (&[(1, 3), (3, 1)], 1),
    };
    for &(i, j) in entries {
        d.blocks[0][(i, j)] = MpScalar::from_i64(prec, -lmi_change);
    }
    let mut deltas = BTreeMap::new();
    deltas.insert(5, d);
    let meta = FamilyMeta {
        name: which.name().to_string(),
        parameter: Some("epsilon".into()),
        ..FamilyMeta::default()
    };
    PerturbedFamily::new(base, deltas, None, meta).expect("consistent family")
}

/// The perturbed problem at `ε` (decimal text, e.g. `"1e-16"`).
pub fn perturbed(which: Perturbation, prec: u32, eps: &str) -> SdpProblem {
    let eps = MpScalar::parse(prec, eps).expect("epsilon literal");
    perturbation_family(which, prec).apply(&eps)
}

fn mat(prec: u32, rows: &[&[i64]]) -> BlockMatrix {
    BlockMatrix::new(vec![MpMatrix::from_i64_rows(prec, rows)])
}

/// 2×2 problem with a strictly feasible pair whose family
/// `A₃(t) = A₃ + t(e₁e₂ᵀ + e₂e₁ᵀ)` keeps the rank yet loses feasibility.
pub fn rank_preserving_infeasible_family(prec: u32) -> PerturbedFamily {
    let a0 = mat(prec, &[&[0, 0], &[0, 1]]);
    let a1 = mat(prec, &[&[1, 0], &[0, 0]]);
    let a2 = mat(prec, &[&[0, 1], &[1, 0]]);
    let a3 = a2.clone();
    let b = vec![MpScalar::from_i64(prec, 2); 3];
    let base = SdpProblem::new(vec![2], vec![a0, a1, a2.clone(), a3], b).expect("valid");
    let mut deltas = BTreeMap::new();
    deltas.insert(3, a2);
    PerturbedFamily::new(
        base,
        deltas,
        None,
        FamilyMeta {
            name: "rank-preserving-infeasible".into(),
            parameter: Some("t".into()),
            ..FamilyMeta::default()
        },
    )
    .expect("valid family")
}

/// 4×4 problem with degree-one singularity whose perturbation of `A₄`
/// leaves the rank condition but moves the minimal face outside the base.
pub fn face_escape_family(prec: u32) -> PerturbedFamily {
    let a0 = mat(
        prec,
        &[&[0, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 1]],
    );
    let a1 = mat(
        prec,
        &[&[0, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 1, 0], &[0, 0, 0, 0]],
    );
    let a2 = mat(
        prec,
        &[&[0, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 1], &[0, 0, 1, 0]],
    );
    let a3 = mat(
        prec,
        &[&[1, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, 1], &[0, 0, 1, 0]],
    );
    let a4 = mat(
        prec,
        &[&[0, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 0, 1], &[0, 0, 1, 0]],
    );
    let d4 = mat(
        prec,
        &[&[0, 0, 0, 0], &[0, 0, 0, 0], &[0, 0, 0, -1], &[0, 0, -1, 0]],
    );
    let b = vec![MpScalar::from_i64(prec, 2); 4];
    let base = SdpProblem::new(vec![4], vec![a0, a1, a2, a3, a4], b).expect("valid");
    let mut deltas = BTreeMap::new();
    deltas.insert(4, d4);
    PerturbedFamily::new(
        base,
        deltas,
        None,
        FamilyMeta {
            name: "face-escape".into(),
            parameter: Some("t".into()),
            ..FamilyMeta::default()
        },
    )
    .expect("valid family")
}

/// Family on [`expprimal`] supported on the first row and column of each
/// block for `k ∈ {2, 3, 5, 6}`, with `A₁` and `A₄` fixed.
pub fn first_row_template_family(prec: u32) -> PerturbedFamily {
    let base = expprimal(prec);
    let mut deltas = BTreeMap::new();
    for (slot, k) in [2usize, 3, 5, 6].into_iter().enumerate() {
        let mut d = BlockMatrix::zeros(prec, &base.block_dims);
        for (b, blk) in d.blocks.iter_mut().enumerate() {
            for i in 0..blk.rows() {
                let v = MpScalar::from_i64(prec, (slot + b + i + 1) as i64);
                blk[(i, 0)] = v.clone();
                blk[(0, i)] = v;
            }
        }
        deltas.insert(k, d);
    }
    PerturbedFamily::new(
        base,
        deltas,
        None,
        FamilyMeta {
            name: "first-row-template".into(),
            parameter: Some("t".into()),
            ..FamilyMeta::default()
        },
    )
    .expect("valid family")
}

/// `inf X s.t. X = 1, X ⪰ 0` on a 1×1 block.
pub fn scalar_toy(prec: u32) -> SdpProblem {
    let one = mat(prec, &[&[1]]);
    SdpProblem::new(vec![1], vec![one.clone(), one], vec![MpScalar::one(prec)]).expect("valid")
}

/// Strictly feasible 2×2 pair: `sup y s.t. [[2,1],[1,2]] − yI ⪰ 0`.
pub fn strictly_feasible_toy(prec: u32) -> SdpProblem {
    let a0 = mat(prec, &[&[2, 1], &[1, 2]]);
    let a1 = BlockMatrix::identity(prec, &[2]);
    SdpProblem::new(vec![2], vec![a0, a1], vec![MpScalar::one(prec)]).expect("valid")
}
