use rayon::prelude::*;
use serde::Serialize;

use crate::facial::{
    compare_faces, facial_reduction, invariance_by_eigenspan, rank_condition, CriterionVerdict,
    FaceRelation, FacialConfig, FacialReductionResult, ReductionStatus,
};
use crate::mpla::MpScalar;

use super::{build_hinf_sdp, matrixwise_family, ControlSystem, HinfError, PlantParam};

/// Effect of a small plant perturbation on the dual minimal face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FaceBehavior {
    Invariant,
    FullDimensional,
    Shrunk,
    Unknown,
}

impl FaceBehavior {
    pub fn label(&self) -> &'static str {
        match self {
            FaceBehavior::Invariant => "Invariant",
            FaceBehavior::FullDimensional => "Full-dimensional",
            FaceBehavior::Shrunk => "Shrunk",
            FaceBehavior::Unknown => "Unknown",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassifyOptions {
    /// Probe magnitudes; each is applied with both signs.
    pub probes: Vec<MpScalar>,
    pub facial: FacialConfig,
}

impl ClassifyOptions {
    /// Probes `1e-16` and `1e-8`.
    pub fn new(prec: u32) -> Self {
        let probes = ["1e-16", "1e-8"]
            .iter()
            .map(|s| MpScalar::parse(prec, s).expect("literal"))
            .collect();
        ClassifyOptions {
            probes,
            facial: FacialConfig::new(prec),
        }
    }

    fn signed_probes(&self) -> Vec<MpScalar> {
        self.probes.iter().flat_map(|t| [t.clone(), -t]).collect()
    }
}

/// Verdict for one parameter with the per-probe evidence.
#[derive(Clone, Debug, Serialize)]
pub struct Classification {
    pub param: String,
    pub behavior: FaceBehavior,
    /// `(t, verdict at t, residual dims at t)`; dims are empty on failure.
    pub probes: Vec<(String, FaceBehavior, Vec<usize>)>,
    /// For `Invariant` verdicts: the eigenspan criterion and the rank
    /// condition at every probe both predict invariance.
    pub criteria_agree: Option<bool>,
}

fn probe_verdict(
    base: &FacialReductionResult,
    res: &FacialReductionResult,
    tol: &MpScalar,
) -> FaceBehavior {
    if res.status != ReductionStatus::MinimalFaceFound {
        return FaceBehavior::Unknown;
    }
    let f = res.minimal_face();
    if f.is_whole() {
        return FaceBehavior::FullDimensional;
    }
    match compare_faces(base.minimal_face(), f, tol) {
        FaceRelation::Equal => FaceBehavior::Invariant,
        FaceRelation::GSubsetF => FaceBehavior::Shrunk,
        _ => FaceBehavior::Unknown,
    }
}

/// Classifies one parameter against a precomputed base reduction.
pub fn classify_against(
    sys: &ControlSystem,
    base: &FacialReductionResult,
    param: &str,
    opts: &ClassifyOptions,
) -> Result<Classification, HinfError> {
    let p = PlantParam::parse(param, sys)?;
    let fam = matrixwise_family(sys, param)?;
    let tol = &opts.facial.cert_tol;
    let mut probes = Vec::new();
    for t in opts.signed_probes() {
        let prob = build_hinf_sdp(&sys.perturbed(p, &t))?;
        let (verdict, dims) = match facial_reduction(&prob, &opts.facial) {
            Ok(res) => (probe_verdict(base, &res, tol), res.residual_dims()),
            Err(e) => {
                log::warn!("{param} at {}: {e}", t.to_f64());
                (FaceBehavior::Unknown, Vec::new())
            }
        };
        probes.push((format!("{:e}", t.to_f64()), verdict, dims));
    }
    let first = probes.first().map_or(FaceBehavior::Unknown, |p| p.1);
    let behavior = if probes.iter().all(|p| p.1 == first) {
        first
    } else {
        FaceBehavior::Unknown
    };
    let criteria_agree = (behavior == FaceBehavior::Invariant).then(|| {
        let eig = invariance_by_eigenspan(base, &fam, tol) == CriterionVerdict::Holds;
        let rank = rank_condition(&fam.base, &fam, base.minimal_face(), &opts.signed_probes())
            .into_iter()
            .all(|b| b);
        if !(eig && rank) {
            log::warn!(
                "{param}: invariant face without criterion support (eigenspan {eig}, rank {rank})"
            );
        }
        eig && rank
    });
    Ok(Classification {
        param: p.name(),
        behavior,
        probes,
        criteria_agree,
    })
}

/// Runs facial reduction on the unperturbed plant and classifies `param`.
pub fn classify_face_behavior(
    sys: &ControlSystem,
    param: &str,
    opts: &ClassifyOptions,
) -> Result<Classification, HinfError> {
    let base = base_reduction(sys, opts)?;
    classify_against(sys, &base, param, opts)
}

fn base_reduction(
    sys: &ControlSystem,
    opts: &ClassifyOptions,
) -> Result<FacialReductionResult, HinfError> {
    facial_reduction(&build_hinf_sdp(sys)?, &opts.facial)
        .map_err(|e| HinfError::Input(format!("base facial reduction failed: {e}")))
}

/// All twelve entries of `A`, `B₂`, `C₁`, `D₁₂` in table order, in parallel.
pub fn classify_all(
    sys: &ControlSystem,
    opts: &ClassifyOptions,
) -> Result<Vec<Classification>, HinfError> {
    let base = base_reduction(sys, opts)?;
    PlantParam::table_order()
        .par_iter()
        .map(|name| classify_against(sys, &base, name, opts))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hinf::{nonstrict_feasibility_criterion, FeasibilityVerdict};

    const P: u32 = 512;

    #[test]
    fn a_entries_split_as_in_the_table() {
        let sys = ControlSystem::reference_plant(P);
        let opts = ClassifyOptions::new(P);
        let a11 = classify_face_behavior(&sys, "a11", &opts).unwrap();
        assert_eq!(a11.behavior, FaceBehavior::Invariant);
        assert_eq!(a11.criteria_agree, Some(true));
        assert!(a11.probes.iter().all(|p| p.2 == vec![5, 1]));
        let a21 = classify_face_behavior(&sys, "a21", &opts).unwrap();
        assert_eq!(a21.behavior, FaceBehavior::FullDimensional);
        assert_eq!(a21.criteria_agree, None);
    }

    #[test]
    fn plant_criterion_agrees_with_face_behavior() {
        let sys = ControlSystem::reference_plant(P);
        let t = MpScalar::parse(P, "1e-8").unwrap();
        for (name, invariant) in [("c12", true), ("c11", false), ("b1", true), ("d2", false)] {
            let p = PlantParam::parse(name, &sys).unwrap();
            let v = nonstrict_feasibility_criterion(&sys.perturbed(p, &t), &[]);
            assert_eq!(
                matches!(v, FeasibilityVerdict::NotStrict { .. }),
                invariant,
                "{name}"
            );
        }
    }

    #[test]
    fn face_inside_reference_is_shrunk() {
        let sys = ControlSystem::reference_plant(P);
        let opts = ClassifyOptions::new(P);
        let base = base_reduction(&sys, &opts).unwrap();
        let mut whole = base.clone();
        whole.faces.truncate(1);
        whole.certificates.clear();
        whole.degree = 0;
        let c = classify_against(&sys, &whole, "a11", &opts).unwrap();
        assert_eq!(c.behavior, FaceBehavior::Shrunk);
    }
}
