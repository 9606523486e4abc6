//! Block-structured SDP pairs.
//!
//! The primal `(P)` is `sup bᵀy` subject to `Z = A₀ − Σ y_k A_k ⪰ 0` and the
//! dual `(D)` is `inf A₀•X` subject to `A_k•X = b_k`, `X ⪰ 0`. Every matrix is
//! block diagonal with the same block sizes.

mod block;
mod family;
mod sdpa;

pub use block::BlockMatrix;
pub use family::{FamilyMeta, PerturbedFamily};
pub use sdpa::{
    format_sdpa, manifest_path, parse_sdpa, read_manifest, read_sdpa, write_manifest, write_sdpa,
    ReadReport, SdpaManifest, SdpaWarning,
};

use crate::mpla::{MpMatrix, MpScalar, MplaError};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdpError {
    #[error(transparent)]
    Linalg(#[from] MplaError),
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error on {path}: {msg}")]
    Io { path: String, msg: String },
}

/// SDP data `(A₀, A₁..A_m, b)` over a product of PSD cones.
#[derive(Clone, Debug, PartialEq)]
pub struct SdpProblem {
    pub block_dims: Vec<usize>,
    /// Blocks stored as diagonal in file formats; the data is kept dense.
    pub diagonal_blocks: Vec<bool>,
    pub m: usize,
    /// `a[0]` is the objective/constant matrix, `a[k]` the k-th constraint.
    pub a: Vec<BlockMatrix>,
    pub b: Vec<MpScalar>,
}

impl SdpProblem {
    pub fn new(
        block_dims: Vec<usize>,
        a: Vec<BlockMatrix>,
        b: Vec<MpScalar>,
    ) -> Result<Self, SdpError> {
        let n = block_dims.len();
        let p = SdpProblem {
            m: b.len(),
            diagonal_blocks: vec![false; n],
            block_dims,
            a,
            b,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        if self.block_dims.contains(&0) {
            return Err(SdpError::Invalid("block dimension zero".into()));
        }
        if self.diagonal_blocks.len() != self.block_dims.len() {
            return Err(SdpError::Invalid(
                "diagonal flags do not match blocks".into(),
            ));
        }
        if self.a.len() != self.m + 1 {
            return Err(SdpError::Invalid(format!(
                "expected {} coefficient matrices, found {}",
                self.m + 1,
                self.a.len()
            )));
        }
        if self.b.len() != self.m {
            return Err(SdpError::Invalid("b has wrong length".into()));
        }
        for (k, ak) in self.a.iter().enumerate() {
            if ak.dims() != self.block_dims {
                return Err(SdpError::Invalid(format!(
                    "A_{k} has blocks {:?}, expected {:?}",
                    ak.dims(),
                    self.block_dims
                )));
            }
            for (l, blk) in ak.blocks.iter().enumerate() {
                if !blk.is_symmetric() {
                    return Err(SdpError::Invalid(format!("A_{k} block {l} not symmetric")));
                }
                if self.diagonal_blocks[l] {
                    for i in 0..blk.rows() {
                        for j in 0..blk.cols() {
                            if i != j && !blk[(i, j)].is_zero() {
                                return Err(SdpError::Invalid(format!(
                                    "A_{k} block {l} is declared diagonal"
                                )));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn prec(&self) -> u32 {
        self.a.iter().map(|a| a.prec()).max().unwrap_or(64)
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        SdpProblem {
            block_dims: self.block_dims.clone(),
            diagonal_blocks: self.diagonal_blocks.clone(),
            m: self.m,
            a: self.a.iter().map(|x| x.with_prec(prec)).collect(),
            b: self.b.iter().map(|x| x.with_prec(prec)).collect(),
        }
    }

    /// Total matrix order `Σ n_blk`.
    pub fn order(&self) -> usize {
        self.block_dims.iter().sum()
    }

    pub fn constraint(&self, k: usize) -> &BlockMatrix {
        &self.a[k]
    }

    /// Coefficient of `y_k` as written in the linear matrix inequality
    /// `A₀ + Σ y_k (−A_k) ⪰ 0`, i.e. `−A_k`.
    pub fn lmi_coefficient(&self, k: usize) -> BlockMatrix {
        self.a[k].neg()
    }

    /// `A₀ − Σ y_k A_k`.
    pub fn slack(&self, y: &[MpScalar]) -> BlockMatrix {
        let mut z = self.a[0].clone();
        for (k, yk) in y.iter().enumerate() {
            if !yk.is_zero() {
                z.axpy(&-yk, &self.a[k + 1]);
            }
        }
        z
    }

    /// `−Σ y_k A_k`.
    pub fn combination(&self, y: &[MpScalar]) -> BlockMatrix {
        let mut w = BlockMatrix::zeros(self.prec(), &self.block_dims);
        for (k, yk) in y.iter().enumerate() {
            if !yk.is_zero() {
                w.axpy(&-yk, &self.a[k + 1]);
            }
        }
        w
    }

    /// `(A_k•X − b_k)_k`.
    pub fn constraint_residual(&self, x: &BlockMatrix) -> Vec<MpScalar> {
        (1..=self.m)
            .map(|k| self.a[k].dot(x) - &self.b[k - 1])
            .collect()
    }

    pub fn primal_objective(&self, y: &[MpScalar]) -> MpScalar {
        crate::mpla::dot_vec(&self.b, y)
    }

    pub fn dual_objective(&self, x: &BlockMatrix) -> MpScalar {
        self.a[0].dot(x)
    }

    /// Matrix with column k equal to `vec(A_k)`, `k = 1..m`.
    pub fn constraint_matrix(&self) -> MpMatrix {
        let prec = self.prec();
        let cols: Vec<Vec<MpScalar>> = (1..=self.m).map(|k| self.a[k].vec()).collect();
        let d = cols.first().map_or(0, |c| c.len());
        MpMatrix::from_fn(prec, d, self.m, |i, j| cols[j][i].clone())
    }
}

/// Primal–dual point with its objective bookkeeping.
#[derive(Clone, Debug)]
pub struct SolutionPair {
    pub y: Vec<MpScalar>,
    pub z: BlockMatrix,
    pub x: BlockMatrix,
    pub primal_obj: MpScalar,
    pub dual_obj: MpScalar,
    pub duality_gap: MpScalar,
}

impl SolutionPair {
    pub fn new(prob: &SdpProblem, y: Vec<MpScalar>, z: BlockMatrix, x: BlockMatrix) -> Self {
        let primal_obj = prob.primal_objective(&y);
        let dual_obj = prob.dual_objective(&x);
        let duality_gap = &dual_obj - &primal_obj;
        SolutionPair {
            y,
            z,
            x,
            primal_obj,
            dual_obj,
            duality_gap,
        }
    }

    /// `max |(A₀ − Σ y_k A_k − Z)_ij|`.
    pub fn primal_residual(&self, prob: &SdpProblem) -> MpScalar {
        prob.slack(&self.y).sub(&self.z).max_abs()
    }

    /// `max_k |A_k•X − b_k|`.
    pub fn dual_residual(&self, prob: &SdpProblem) -> MpScalar {
        let mut m = MpScalar::zero(prob.prec());
        for r in prob.constraint_residual(&self.x) {
            m = m.max(&r.abs());
        }
        m
    }

    pub fn complementarity(&self) -> MpScalar {
        self.x.dot(&self.z)
    }
}

/// `Σ_ij a_ij b_ij`.
pub fn dot(a: &MpMatrix, b: &MpMatrix) -> Result<MpScalar, MplaError> {
    a.try_frobenius_dot(b)
}

/// Row-major vectorization `(a₁₁, a₁₂, …, a_nn)`.
pub fn vec(a: &MpMatrix) -> Vec<MpScalar> {
    a.vec()
}

/// Reshapes a row-major vector into an `n×n` matrix.
pub fn unvec(prec: u32, n: usize, v: &[MpScalar]) -> Result<MpMatrix, MplaError> {
    MpMatrix::from_row_major(prec, n, n, v.to_vec())
}

/// `M + Mᵀ`.
pub fn he(m: &MpMatrix) -> Result<MpMatrix, MplaError> {
    if !m.is_square() {
        return Err(MplaError::NotSquare(m.shape()));
    }
    Ok(m.add(&m.transpose()))
}

/// `L(X, y) = A₀•X + Σ y_k (b_k − A_k•X)`.
pub fn lagrangian(
    prob: &SdpProblem,
    x: &BlockMatrix,
    y: &[MpScalar],
) -> Result<MpScalar, SdpError> {
    if x.dims() != prob.block_dims {
        return Err(MplaError::ShapeMismatch {
            expected: (prob.order(), prob.order()),
            found: (x.dims().iter().sum(), x.dims().iter().sum()),
        }
        .into());
    }
    if y.len() != prob.m {
        return Err(MplaError::ShapeMismatch {
            expected: (prob.m, 1),
            found: (y.len(), 1),
        }
        .into());
    }
    let mut l = prob.a[0].try_dot(x)?;
    for (k, yk) in y.iter().enumerate() {
        let r = &prob.b[k] - &prob.a[k + 1].try_dot(x)?;
        l.add_mul(yk, &r);
    }
    Ok(l)
}
