use crate::mpla::{MpMatrix, MpScalar, MplaError};

/// Block-diagonal symmetric matrix stored as its diagonal blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMatrix {
    pub blocks: Vec<MpMatrix>,
}

impl BlockMatrix {
    pub fn new(blocks: Vec<MpMatrix>) -> Self {
        BlockMatrix { blocks }
    }

    pub fn zeros(prec: u32, dims: &[usize]) -> Self {
        BlockMatrix {
            blocks: dims.iter().map(|&d| MpMatrix::zeros(prec, d, d)).collect(),
        }
    }

    pub fn identity(prec: u32, dims: &[usize]) -> Self {
        BlockMatrix {
            blocks: dims.iter().map(|&d| MpMatrix::identity(prec, d)).collect(),
        }
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.rows()).collect()
    }

    pub fn prec(&self) -> u32 {
        self.blocks.iter().map(|b| b.prec()).max().unwrap_or(64)
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        self.map(|b| b.with_prec(prec))
    }

    pub fn map(&self, f: impl Fn(&MpMatrix) -> MpMatrix) -> Self {
        BlockMatrix {
            blocks: self.blocks.iter().map(f).collect(),
        }
    }

    fn check(&self, other: &BlockMatrix) -> Result<(), MplaError> {
        if self.blocks.len() != other.blocks.len() {
            return Err(MplaError::ShapeMismatch {
                expected: (self.blocks.len(), 0),
                found: (other.blocks.len(), 0),
            });
        }
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            if a.shape() != b.shape() {
                return Err(MplaError::ShapeMismatch {
                    expected: a.shape(),
                    found: b.shape(),
                });
            }
        }
        Ok(())
    }

    pub fn try_add(&self, other: &BlockMatrix) -> Result<Self, MplaError> {
        self.check(other)?;
        Ok(self.zip(other, |a, b| a.add(b)))
    }

    pub fn try_sub(&self, other: &BlockMatrix) -> Result<Self, MplaError> {
        self.check(other)?;
        Ok(self.zip(other, |a, b| a.sub(b)))
    }

    pub fn add(&self, other: &BlockMatrix) -> Self {
        self.try_add(other).expect("block structures differ")
    }

    pub fn sub(&self, other: &BlockMatrix) -> Self {
        self.try_sub(other).expect("block structures differ")
    }

    fn zip(&self, other: &BlockMatrix, f: impl Fn(&MpMatrix, &MpMatrix) -> MpMatrix) -> Self {
        BlockMatrix {
            blocks: self
                .blocks
                .iter()
                .zip(&other.blocks)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, s: &MpScalar) -> Self {
        self.map(|b| b.scale(s))
    }

    pub fn neg(&self) -> Self {
        self.map(|b| b.neg())
    }

    /// In-place `self += alpha * other`.
    pub fn axpy(&mut self, alpha: &MpScalar, other: &BlockMatrix) {
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            a.axpy(alpha, b);
        }
    }

    /// Frobenius inner product summed over blocks.
    pub fn try_dot(&self, other: &BlockMatrix) -> Result<MpScalar, MplaError> {
        self.check(other)?;
        let mut acc = MpScalar::zero(self.prec().max(other.prec()));
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            acc += a.try_frobenius_dot(b)?;
        }
        Ok(acc)
    }

    pub fn dot(&self, other: &BlockMatrix) -> MpScalar {
        self.try_dot(other).expect("block structures differ")
    }

    pub fn trace(&self) -> MpScalar {
        let mut acc = MpScalar::zero(self.prec());
        for b in &self.blocks {
            acc += b.trace();
        }
        acc
    }

    pub fn frobenius_norm(&self) -> MpScalar {
        let mut acc = MpScalar::zero(self.prec());
        for b in &self.blocks {
            acc += b.frobenius_norm().square();
        }
        acc.sqrt()
    }

    pub fn max_abs(&self) -> MpScalar {
        let mut m = MpScalar::zero(self.prec());
        for b in &self.blocks {
            m = m.max(&b.max_abs());
        }
        m
    }

    pub fn is_symmetric(&self) -> bool {
        self.blocks.iter().all(|b| b.is_symmetric())
    }

    pub fn symmetrize(&self) -> Self {
        self.map(|b| b.symmetrize())
    }

    pub fn is_zero(&self) -> bool {
        self.blocks
            .iter()
            .all(|b| b.entries().iter().all(|x| x.is_zero()))
    }

    /// Concatenated row-major vectorization of the blocks.
    pub fn vec(&self) -> Vec<MpScalar> {
        self.blocks.iter().flat_map(|b| b.vec()).collect()
    }

    /// Inverse of [`BlockMatrix::vec`].
    pub fn from_vec(prec: u32, dims: &[usize], v: &[MpScalar]) -> Self {
        let mut off = 0;
        let blocks = dims
            .iter()
            .map(|&d| {
                let m = MpMatrix::from_fn(prec, d, d, |i, j| v[off + i * d + j].clone());
                off += d * d;
                m
            })
            .collect();
        BlockMatrix { blocks }
    }

    /// The full block-diagonal matrix.
    pub fn to_dense(&self) -> MpMatrix {
        let n: usize = self.dims().iter().sum();
        let mut out = MpMatrix::zeros(self.prec(), n, n);
        let mut off = 0;
        for b in &self.blocks {
            out.set_submatrix(off, off, b);
            off += b.rows();
        }
        out
    }

    /// Nonzero entries `(block, i, j, value)` over both triangles.
    pub fn nonzeros(&self) -> Vec<(usize, usize, usize, MpScalar)> {
        let mut out = Vec::new();
        for (l, b) in self.blocks.iter().enumerate() {
            for i in 0..b.rows() {
                for j in 0..b.cols() {
                    if !b[(i, j)].is_zero() {
                        out.push((l, i, j, b[(i, j)].clone()));
                    }
                }
            }
        }
        out
    }
}
