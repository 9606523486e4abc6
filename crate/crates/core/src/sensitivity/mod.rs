//! Parameter sweeps over perturbation families with value and face
//! diagnostics, attainment tests, and closed-form value checks.

mod attainment;
mod continuity;
mod values;

pub use attainment::{attainment_check, Attainment, AttainmentError};
pub use continuity::{continuity_diagnostic, ContinuityReport, ContinuityVerdict};
pub use values::{verify_value_certificates, ValueCertificateReport, ValueCheck};

use rayon::prelude::*;
use serde::Serialize;

use crate::facial::{
    compare_faces, facial_reduction, rank_condition, Face, FaceRelation, FacialConfig,
    ReductionStatus,
};
use crate::ipm::{solve, SolverConfig};
use crate::mpla::MpScalar;
use crate::sdpmodel::PerturbedFamily;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SensitivityError {
    #[error("bad grid: {0}")]
    Grid(String),
    #[error("bad sweep table: {0}")]
    Table(String),
    #[error("base facial reduction failed: {0}")]
    Base(String),
}

/// Which per-point diagnostics a sweep computes besides the solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepOutputs {
    pub faces: bool,
    pub rank: bool,
}

impl SweepOutputs {
    pub fn all() -> Self {
        SweepOutputs {
            faces: true,
            rank: true,
        }
    }

    pub fn values_only() -> Self {
        SweepOutputs {
            faces: false,
            rank: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub family: PerturbedFamily,
    pub t_grid: Vec<MpScalar>,
    pub solver: SolverConfig,
    pub facial: FacialConfig,
    pub outputs: SweepOutputs,
}

impl SweepSpec {
    pub fn new(family: PerturbedFamily, t_grid: Vec<MpScalar>, solver: SolverConfig) -> Self {
        let facial = FacialConfig::new(solver.precision_bits);
        SweepSpec {
            family,
            t_grid,
            solver,
            facial,
            outputs: SweepOutputs::all(),
        }
    }

    pub fn with_outputs(mut self, outputs: SweepOutputs) -> Self {
        self.outputs = outputs;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.facial.seed = seed;
        self
    }

    /// The grid sorted ascending with `0` added if missing.
    pub fn grid(&self) -> Vec<MpScalar> {
        let prec = self.solver.precision_bits;
        let mut g: Vec<MpScalar> = self.t_grid.iter().map(|t| t.with_prec(prec)).collect();
        if !g.iter().any(|t| t.is_zero()) {
            g.push(MpScalar::zero(prec));
        }
        g.sort_by(|a, b| a.partial_cmp(b).expect("finite grid"));
        g.dedup();
        g
    }
}

/// Residual dimensions of the minimal face and the number of steps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FaceSignature {
    pub degree: usize,
    pub r: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum FeasibilityStatus {
    /// Facial reduction found no certificate.
    StrictlyFeasible,
    /// Feasible points exist only on a proper face.
    ProperFace,
    Infeasible,
    NotChecked,
    Failed,
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepRow {
    pub t: MpScalar,
    pub primal_value: Option<MpScalar>,
    pub dual_value: Option<MpScalar>,
    pub face_signature: Option<FaceSignature>,
    /// The face equals the base minimal face; `None` when faces are off.
    pub same_face: Option<bool>,
    pub rank_condition_holds: Option<bool>,
    pub feasibility_status: FeasibilityStatus,
    pub solve_iterations: usize,
    /// Solve status, or the error text when the solve failed.
    pub status: String,
}

impl SweepRow {
    /// `bᵀy` of the final iterate.
    pub fn value(&self) -> Option<&MpScalar> {
        self.primal_value.as_ref()
    }

    pub fn is_optimal(&self) -> bool {
        self.status == "Optimal"
    }
}

fn sweep_point(spec: &SweepSpec, base_face: Option<&Face>, t: &MpScalar) -> SweepRow {
    let prob = spec.family.apply(t);
    let mut row = SweepRow {
        t: t.clone(),
        primal_value: None,
        dual_value: None,
        face_signature: None,
        same_face: None,
        rank_condition_holds: None,
        feasibility_status: FeasibilityStatus::NotChecked,
        solve_iterations: 0,
        status: String::new(),
    };
    match solve(&prob, &spec.solver) {
        Ok(rep) => {
            row.primal_value = Some(rep.solution.primal_obj);
            row.dual_value = Some(rep.solution.dual_obj);
            row.solve_iterations = rep.iterations;
            row.status = rep.status.to_string();
        }
        Err(e) => row.status = format!("error: {e}"),
    }
    if spec.outputs.faces {
        match facial_reduction(&prob, &spec.facial) {
            Ok(res) => {
                row.feasibility_status = match (res.status, res.degree) {
                    (ReductionStatus::InfeasibleDetected, _) => FeasibilityStatus::Infeasible,
                    (_, 0) => FeasibilityStatus::StrictlyFeasible,
                    _ => FeasibilityStatus::ProperFace,
                };
                if let Some(bf) = base_face {
                    row.same_face = Some(
                        compare_faces(bf, res.minimal_face(), &spec.facial.cert_tol)
                            == FaceRelation::Equal,
                    );
                }
                row.face_signature = Some(FaceSignature {
                    degree: res.degree,
                    r: res.residual_dims(),
                });
            }
            Err(e) => {
                log::warn!("facial reduction at t = {}: {e}", t.to_f64());
                row.feasibility_status = FeasibilityStatus::Failed;
            }
        }
    }
    if spec.outputs.rank {
        if let Some(bf) = base_face {
            row.rank_condition_holds =
                rank_condition(&spec.family.base, &spec.family, bf, std::slice::from_ref(t))
                    .first()
                    .copied();
        }
    }
    row
}

/// One row per grid point (with `t = 0` added), ordered by `t`.
///
/// Points run in parallel; a failing point is recorded in its row.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, SensitivityError> {
    let base_face = if spec.outputs.faces || spec.outputs.rank {
        let res = facial_reduction(&spec.family.base, &spec.facial)
            .map_err(|e| SensitivityError::Base(e.to_string()))?;
        Some(res.minimal_face().clone())
    } else {
        None
    };
    let grid = spec.grid();
    Ok(grid
        .par_iter()
        .map(|t| sweep_point(spec, base_face.as_ref(), t))
        .collect())
}

/// `±k·step` for `k = k_min..=k_max`.
pub fn symmetric_grid(step: &MpScalar, k_min: i64, k_max: i64) -> Vec<MpScalar> {
    let prec = step.prec();
    let mut g = Vec::new();
    for k in k_min..=k_max {
        let t = step * &MpScalar::from_i64(prec, k);
        g.push(-&t);
        g.push(t);
    }
    g
}

/// Parses `±k*STEP:A..B`, `k*STEP:A..B` or a comma-separated list.
pub fn parse_grid(text: &str, prec: u32) -> Result<Vec<MpScalar>, SensitivityError> {
    let bad = || SensitivityError::Grid(text.to_string());
    let num = |s: &str| MpScalar::parse(prec, s.trim()).map_err(|_| bad());
    let text = text.trim();
    let (symmetric, rest) = match text.strip_prefix('±').or_else(|| text.strip_prefix("+-")) {
        Some(r) => (true, r),
        None => (false, text),
    };
    if let Some(body) = rest.strip_prefix("k*") {
        let (step, range) = body.split_once(':').ok_or_else(bad)?;
        let (a, b) = range.split_once("..").ok_or_else(bad)?;
        let a: i64 = a.trim().parse().map_err(|_| bad())?;
        let b: i64 = b.trim().parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        let step = num(step)?;
        return Ok(if symmetric {
            symmetric_grid(&step, a, b)
        } else {
            (a..=b)
                .map(|k| &step * &MpScalar::from_i64(prec, k))
                .collect()
        });
    }
    if symmetric {
        return Err(bad());
    }
    rest.split(',').map(num).collect()
}

fn opt_dec(v: &Option<MpScalar>) -> String {
    v.as_ref().map_or(String::new(), |x| x.to_decimal_full())
}

/// CSV with columns `t, primal, dual, gap, degree, r_blocks, rank_ok, status`.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "t", "primal", "dual", "gap", "degree", "r_blocks", "rank_ok", "status",
    ])
    .expect("in-memory write");
    for r in rows {
        let gap = match (&r.primal_value, &r.dual_value) {
            (Some(p), Some(d)) => (d - p).to_decimal_full(),
            _ => String::new(),
        };
        let (degree, blocks) = match &r.face_signature {
            Some(f) => (
                f.degree.to_string(),
                f.r.iter()
                    .map(|x| x.to_string())
                    .collect::<Vec<_>>()
                    .join(";"),
            ),
            None => (String::new(), String::new()),
        };
        let rank = r
            .rank_condition_holds
            .map_or(String::new(), |b| b.to_string());
        w.write_record([
            r.t.to_decimal_full(),
            opt_dec(&r.primal_value),
            opt_dec(&r.dual_value),
            gap,
            degree,
            blocks,
            rank,
            r.status.clone(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Reads rows written by [`to_csv`]; diagnostics absent from the table are
/// left unset.
pub fn from_csv(text: &str, prec: u32) -> Result<Vec<SweepRow>, SensitivityError> {
    let bad = |m: String| SensitivityError::Table(m);
    let num = |s: &str| -> Result<Option<MpScalar>, SensitivityError> {
        if s.is_empty() {
            return Ok(None);
        }
        MpScalar::parse(prec, s)
            .map(Some)
            .map_err(|_| bad(format!("bad number {s:?}")))
    };
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        if rec.len() != 8 {
            return Err(bad(format!("expected 8 fields, found {}", rec.len())));
        }
        let t = num(&rec[0])?.ok_or_else(|| bad("missing t".into()))?;
        let face_signature = if rec[4].is_empty() {
            None
        } else {
            let degree = rec[4].parse().map_err(|_| bad("bad degree".into()))?;
            let r = rec[5]
                .split(';')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse().map_err(|_| bad("bad r_blocks".into())))
                .collect::<Result<_, _>>()?;
            Some(FaceSignature { degree, r })
        };
        let rank_condition_holds = match &rec[6] {
            "" => None,
            "true" => Some(true),
            "false" => Some(false),
            s => return Err(bad(format!("bad rank_ok {s:?}"))),
        };
        rows.push(SweepRow {
            t,
            primal_value: num(&rec[1])?,
            dual_value: num(&rec[2])?,
            face_signature,
            same_face: None,
            rank_condition_holds,
            feasibility_status: FeasibilityStatus::NotChecked,
            solve_iterations: 0,
            status: rec[7].to_string(),
        });
    }
    Ok(rows)
}

/// Two whitespace-separated columns `t  value(t) − value(0)` over optimal
/// rows, one point per line.
pub fn plot_data(rows: &[SweepRow]) -> String {
    let Some(v0) = rows.iter().find(|r| r.t.is_zero()).and_then(|r| r.value()) else {
        return String::new();
    };
    let mut out = String::from("# t delta_value\n");
    for r in rows.iter().filter(|r| r.is_optimal()) {
        if let Some(v) = r.value() {
            out.push_str(&format!(
                "{} {}\n",
                r.t.to_decimal(17),
                (v - v0).to_decimal(17)
            ));
        }
    }
    out
}

/// Optimal value of each named problem at each stopping tolerance.
#[derive(Clone, Debug, Serialize)]
pub struct ToleranceEntry {
    pub problem: String,
    pub delta: String,
    pub status: String,
    pub value: Option<MpScalar>,
}

pub fn tolerance_table(
    problems: &[(String, crate::sdpmodel::SdpProblem)],
    deltas: &[&str],
    prec: u32,
) -> Vec<ToleranceEntry> {
    let jobs: Vec<(usize, &str)> = (0..problems.len())
        .flat_map(|i| deltas.iter().map(move |d| (i, *d)))
        .collect();
    jobs.par_iter()
        .map(|&(i, d)| {
            let cfg = SolverConfig::reference_at(prec, d);
            let (status, value) = match solve(&problems[i].1, &cfg) {
                Ok(r) => (r.status.to_string(), Some(r.solution.primal_obj)),
                Err(e) => (format!("error: {e}"), None),
            };
            ToleranceEntry {
                problem: problems[i].0.clone(),
                delta: d.to_string(),
                status,
                value,
            }
        })
        .collect()
}
