use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::mpla::{default_rank_tol, norm_vec, pseudoinverse, MpMatrix, MpScalar};
use crate::sdpmodel::{BlockMatrix, SdpProblem};

use super::certificate::{aux_search, reduced_data, AuxOutcome};
use super::{
    compare_faces, intersect_face, solve_discriminant, verify_certificate, Discriminant, Face,
    FaceRelation, FacialConfig, FacialError, ReducingCertificate,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReductionStatus {
    MinimalFaceFound,
    InfeasibleDetected,
}

/// Faces `F₀ ⊋ F₁ ⊋ … ⊋ F_s` with the certificates that produced them.
#[derive(Clone, Debug)]
pub struct FacialReductionResult {
    pub faces: Vec<Face>,
    pub certificates: Vec<ReducingCertificate>,
    pub degree: usize,
    pub status: ReductionStatus,
    /// `y` with `bᵀy = 1` and `−Σ y_k A_k ⪰ 0` on the last face, when found.
    pub farkas: Option<Vec<MpScalar>>,
}

impl FacialReductionResult {
    pub fn minimal_face(&self) -> &Face {
        self.faces.last().expect("at least the whole cone")
    }

    pub fn residual_dims(&self) -> Vec<usize> {
        self.minimal_face().r.clone()
    }

    pub fn to_manifest(&self) -> FacialManifest {
        FacialManifest {
            precision_bits: self.minimal_face().prec(),
            status: self.status,
            degree: self.degree,
            residual_dims: self.residual_dims(),
            faces: self
                .faces
                .iter()
                .map(|f| {
                    f.q.iter()
                        .zip(&f.r)
                        .map(|(q, &r)| FaceBlockEntry {
                            r,
                            q: text_matrix(q),
                        })
                        .collect()
                })
                .collect(),
            certificates: self
                .certificates
                .iter()
                .map(|c| CertificateEntry {
                    y: c.y.iter().map(|x| x.to_decimal_full()).collect(),
                    u: c.u.blocks.iter().map(text_matrix).collect(),
                    v: c.v.blocks.iter().map(text_matrix).collect(),
                })
                .collect(),
        }
    }

    pub fn from_manifest(man: &FacialManifest, prec: u32) -> Result<Self, FacialError> {
        let faces = man
            .faces
            .iter()
            .map(|blocks| {
                let mut q = Vec::new();
                let mut r = Vec::new();
                for e in blocks {
                    let m = parse_matrix(&e.q, prec)?;
                    if e.r > m.rows() || !m.is_square() {
                        return Err(FacialError::Manifest("face block shape".into()));
                    }
                    q.push(m);
                    r.push(e.r);
                }
                Ok(Face { q, r })
            })
            .collect::<Result<Vec<_>, _>>()?;
        if faces.is_empty() {
            return Err(FacialError::Manifest("no faces".into()));
        }
        let certificates = man
            .certificates
            .iter()
            .map(|c| {
                let y =
                    c.y.iter()
                        .map(|s| parse_scalar(s, prec))
                        .collect::<Result<Vec<_>, _>>()?;
                let blocks = |src: &[Vec<Vec<String>>]| -> Result<BlockMatrix, FacialError> {
                    Ok(BlockMatrix::new(
                        src.iter()
                            .map(|m| parse_matrix(m, prec))
                            .collect::<Result<Vec<_>, _>>()?,
                    ))
                };
                Ok(ReducingCertificate {
                    y,
                    u: blocks(&c.u)?,
                    v: blocks(&c.v)?,
                })
            })
            .collect::<Result<Vec<_>, FacialError>>()?;
        if certificates.len() + 1 != faces.len() || man.degree != certificates.len() {
            return Err(FacialError::Manifest(
                "certificate count does not match faces".into(),
            ));
        }
        Ok(FacialReductionResult {
            faces,
            certificates,
            degree: man.degree,
            status: man.status,
            farkas: None,
        })
    }
}

/// JSON form of a reduction: every face's `Q` and `r`, and every certificate,
/// as decimal strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacialManifest {
    pub precision_bits: u32,
    pub status: ReductionStatus,
    pub degree: usize,
    pub residual_dims: Vec<usize>,
    pub faces: Vec<Vec<FaceBlockEntry>>,
    pub certificates: Vec<CertificateEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaceBlockEntry {
    pub r: usize,
    pub q: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub y: Vec<String>,
    pub u: Vec<Vec<Vec<String>>>,
    pub v: Vec<Vec<Vec<String>>>,
}

impl FacialManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, FacialError> {
        serde_json::from_str(text).map_err(|e| FacialError::Manifest(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, FacialError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| FacialError::Manifest(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

fn text_matrix(m: &MpMatrix) -> Vec<Vec<String>> {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|x| x.to_decimal_full()).collect())
        .collect()
}

fn parse_scalar(s: &str, prec: u32) -> Result<MpScalar, FacialError> {
    MpScalar::parse(prec, s).map_err(|_| FacialError::Manifest(format!("bad number {s:?}")))
}

fn parse_matrix(rows: &[Vec<String>], prec: u32) -> Result<MpMatrix, FacialError> {
    let n = rows.len();
    let c = rows.first().map_or(0, |r| r.len());
    let mut out = MpMatrix::zeros(prec, n, c);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != c {
            return Err(FacialError::Manifest("ragged matrix".into()));
        }
        for (j, s) in row.iter().enumerate() {
            out[(i, j)] = parse_scalar(s, prec)?;
        }
    }
    Ok(out)
}

/// Relative residual `‖Sᵀx − b‖ / max(1, ‖b‖)` of the least-squares solution
/// of `(QᵀA_kQ)₃•X = b_k`, with data below `tol` treated as zero; positive
/// values mean no feasible point in `f`.
pub fn linear_consistency(prob: &SdpProblem, f: &Face, tol: &MpScalar) -> MpScalar {
    let prec = prob.prec();
    let one = MpScalar::one(prec);
    let bnorm = norm_vec(&prob.b);
    let scale = bnorm.max(&one);
    if f.active_blocks().is_empty() || prob.m == 0 {
        return &bnorm / &scale;
    }
    let data = reduced_data(prob, f, tol);
    let cols: Vec<Vec<MpScalar>> = data
        .iter()
        .map(|bk| bk.iter().flat_map(|m| m.vec()).collect())
        .collect();
    let st = MpMatrix::from_fn(prec, prob.m, cols[0].len(), |k, j| cols[k][j].clone());
    let pinv = match pseudoinverse(&st, &default_rank_tol(prec)) {
        Ok(p) => p,
        Err(_) => return MpScalar::from_f64(prec, f64::INFINITY),
    };
    let x = pinv.mul_vec(&prob.b);
    let fit = st.mul_vec(&x);
    let diff: Vec<MpScalar> = fit.iter().zip(&prob.b).map(|(a, b)| a - b).collect();
    &norm_vec(&diff) / &scale
}

/// Looks for `y` with `bᵀy = 1` and `−Σ y_k (QᵀA_kQ)₃ ⪰ 0`.
fn farkas_search(
    prob: &SdpProblem,
    f: &Face,
    cfg: &FacialConfig,
) -> Result<Option<Option<Vec<MpScalar>>>, FacialError> {
    if prob.b.iter().all(|x| x.is_zero()) || f.active_blocks().is_empty() {
        return Ok(None);
    }
    let dims: Vec<usize> = f.active_blocks().iter().map(|&b| f.r[b]).collect();
    let data = reduced_data(prob, f, &cfg.cert_tol);
    let rhs = vec![MpScalar::one(cfg.precision_bits)];
    // The search is a sufficient test only, so an inconclusive solve counts
    // as no direction.
    Ok(
        match aux_search(&data, &dims, std::slice::from_ref(&prob.b), &rhs, cfg) {
            Ok(AuxOutcome::Point { y, s }) if s <= cfg.cert_tol => Some(Some(y)),
            Ok(AuxOutcome::Unbounded) => Some(None),
            Ok(_) => None,
            Err(FacialError::SolverFailure { status, .. }) => {
                log::debug!("Farkas search inconclusive ({status})");
                None
            }
            Err(e) => return Err(e),
        },
    )
}

/// Repeats the discriminant search from the whole cone until none exists.
///
/// Each step uses seed `cfg.seed + i` for the auxiliary search basis. The
/// loop also stops with `InfeasibleDetected` when the equations restricted to
/// the current face are inconsistent or a Farkas-type `y` is found.
pub fn facial_reduction(
    prob: &SdpProblem,
    cfg: &FacialConfig,
) -> Result<FacialReductionResult, FacialError> {
    let prec = cfg.precision_bits;
    let prob = prob.with_prec(prec);
    let mut res = FacialReductionResult {
        faces: vec![Face::whole(prec, &prob.block_dims)],
        certificates: Vec::new(),
        degree: 0,
        status: ReductionStatus::MinimalFaceFound,
        farkas: None,
    };
    let bound = prob.order();
    loop {
        let f = res.minimal_face().clone();
        if linear_consistency(&prob, &f, &cfg.cert_tol) > cfg.cert_tol {
            res.status = ReductionStatus::InfeasibleDetected;
            break;
        }
        if res.certificates.len() >= bound {
            log::warn!("reduction stopped at the iteration bound {bound}");
            break;
        }
        let mut step_cfg = cfg.clone();
        step_cfg.seed = cfg.seed.wrapping_add(res.certificates.len() as u64);
        let outcome = match solve_discriminant(&prob, &f, &step_cfg) {
            Ok(o) => o,
            Err(FacialError::SolverFailure { status, .. }) => {
                return Err(FacialError::SolverFailure {
                    status,
                    completed: res.certificates.len(),
                    partial: Some(Box::new(res)),
                })
            }
            Err(e) => return Err(e),
        };
        match outcome {
            Discriminant::Certificate(cert) => {
                let next = intersect_face(&f, &cert.u, &cfg.cert_tol)?;
                if next.total_residual() >= f.total_residual() {
                    return Err(FacialError::Stalled);
                }
                res.faces.push(next);
                res.certificates.push(cert);
                res.degree += 1;
            }
            Discriminant::NoneFound => {
                if cfg.farkas_check {
                    if let Some(y) = farkas_search(&prob, &f, &step_cfg)? {
                        res.status = ReductionStatus::InfeasibleDetected;
                        res.farkas = y;
                    }
                }
                break;
            }
        }
    }
    Ok(res)
}

/// Independent re-check of a stored reduction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    /// Per certificate: the certificate conditions hold on its face.
    pub certificates_valid: Vec<bool>,
    /// Per certificate: `F_i ∩ {U^i}^⊥` reproduces the stored `F_{i+1}`.
    pub faces_consistent: Vec<bool>,
    pub faces_orthogonal: bool,
}

impl AuditReport {
    pub fn ok(&self) -> bool {
        self.faces_orthogonal
            && self.certificates_valid.iter().all(|&b| b)
            && self.faces_consistent.iter().all(|&b| b)
    }
}

pub fn audit(prob: &SdpProblem, res: &FacialReductionResult, tol: &MpScalar) -> AuditReport {
    let prob = prob.with_prec(res.minimal_face().prec());
    let mut certificates_valid = Vec::new();
    let mut faces_consistent = Vec::new();
    for (i, cert) in res.certificates.iter().enumerate() {
        let f = &res.faces[i];
        certificates_valid.push(verify_certificate(&prob, f, cert, tol));
        faces_consistent.push(match intersect_face(f, &cert.u, tol) {
            Ok(next) => {
                next.r == res.faces[i + 1].r
                    && compare_faces(&next, &res.faces[i + 1], tol) == FaceRelation::Equal
            }
            Err(_) => false,
        });
    }
    let faces_orthogonal = res.faces.iter().all(|f| f.orthogonality_error() <= *tol);
    AuditReport {
        certificates_valid,
        faces_consistent,
        faces_orthogonal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{rank_preserving_infeasible_family, strictly_feasible_toy};

    const P: u32 = 256;

    #[test]
    fn strictly_feasible_dual_has_degree_zero() {
        let prob = strictly_feasible_toy(P);
        let res = facial_reduction(&prob, &FacialConfig::new(P)).unwrap();
        assert_eq!(res.degree, 0);
        assert_eq!(res.status, ReductionStatus::MinimalFaceFound);
        assert!(res.minimal_face().is_whole());
    }

    #[test]
    fn inconsistent_restriction_is_infeasible() {
        let fam = rank_preserving_infeasible_family(P);
        let t = MpScalar::parse(P, "1e-8").unwrap();
        let res = facial_reduction(&fam.apply(&t), &FacialConfig::new(P)).unwrap();
        assert_eq!(res.status, ReductionStatus::InfeasibleDetected);
        let base = facial_reduction(&fam.base, &FacialConfig::new(P)).unwrap();
        assert_eq!(base.status, ReductionStatus::MinimalFaceFound);
    }

    #[test]
    fn farkas_direction_is_found() {
        // X₁₁ = −1 has no PSD solution; y = −1 gives bᵀy = 1, −yA₁ ⪰ 0.
        let one = BlockMatrix::new(vec![MpMatrix::from_i64_rows(P, &[&[1, 0], &[0, 0]])]);
        let prob = SdpProblem::new(
            vec![2],
            vec![BlockMatrix::identity(P, &[2]), one],
            vec![MpScalar::from_i64(P, -1)],
        )
        .unwrap();
        let res = facial_reduction(&prob, &FacialConfig::new(P)).unwrap();
        assert_eq!(res.status, ReductionStatus::InfeasibleDetected);
        let y = res.farkas.expect("direction");
        assert!((y[0].to_f64() + 1.0).abs() < 1e-30);
    }
}
