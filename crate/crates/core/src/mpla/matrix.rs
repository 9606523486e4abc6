use std::fmt;
use std::ops::{Index, IndexMut};

use super::{MpScalar, MplaError};

/// Dense row-major matrix of [`MpScalar`] entries.
#[derive(Clone, PartialEq)]
pub struct MpMatrix {
    rows: usize,
    cols: usize,
    prec: u32,
    data: Vec<MpScalar>,
}

impl MpMatrix {
    pub fn zeros(prec: u32, rows: usize, cols: usize) -> Self {
        MpMatrix {
            rows,
            cols,
            prec,
            data: vec![MpScalar::zero(prec); rows * cols],
        }
    }

    pub fn identity(prec: u32, n: usize) -> Self {
        let mut m = Self::zeros(prec, n, n);
        for i in 0..n {
            m[(i, i)] = MpScalar::one(prec);
        }
        m
    }

    pub fn from_fn(
        prec: u32,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> MpScalar,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j).with_prec(prec));
            }
        }
        MpMatrix {
            rows,
            cols,
            prec,
            data,
        }
    }

    pub fn from_row_major(
        prec: u32,
        rows: usize,
        cols: usize,
        data: Vec<MpScalar>,
    ) -> Result<Self, MplaError> {
        if data.len() != rows * cols {
            return Err(MplaError::ShapeMismatch {
                expected: (rows, cols),
                found: (data.len(), 1),
            });
        }
        Ok(MpMatrix {
            rows,
            cols,
            prec,
            data,
        })
    }

    /// Builds a matrix from integer rows.
    pub fn from_i64_rows(prec: u32, rows: &[&[i64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(prec, r, c, |i, j| MpScalar::from_i64(prec, rows[i][j]))
    }

    pub fn from_f64_rows(prec: u32, rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(prec, r, c, |i, j| MpScalar::from_f64(prec, rows[i][j]))
    }

    /// Symmetric matrix from a lower triangle given row by row.
    pub fn from_lower_i64(prec: u32, lower: &[&[i64]]) -> Self {
        let n = lower.len();
        Self::from_fn(prec, n, n, |i, j| {
            let (a, b) = if i >= j { (i, j) } else { (j, i) };
            MpScalar::from_i64(prec, lower[a][b])
        })
    }

    pub fn diag(prec: u32, d: &[MpScalar]) -> Self {
        let mut m = Self::zeros(prec, d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m[(i, i)] = v.with_prec(prec);
        }
        m
    }

    /// Column vector.
    pub fn column_vector(prec: u32, v: &[MpScalar]) -> Self {
        Self::from_fn(prec, v.len(), 1, |i, _| v[i].clone())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(&self, prec: u32) -> Self {
        MpMatrix {
            rows: self.rows,
            cols: self.cols,
            prec,
            data: self.data.iter().map(|x| x.with_prec(prec)).collect(),
        }
    }

    pub fn entries(&self) -> &[MpScalar] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[MpScalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<MpScalar> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[MpScalar]) {
        for (i, x) in v.iter().enumerate() {
            self[(i, j)] = x.clone();
        }
    }

    /// Columns `idx` in the given order.
    pub fn select_columns(&self, idx: &[usize]) -> Self {
        Self::from_fn(self.prec, self.rows, idx.len(), |i, j| {
            self[(i, idx[j])].clone()
        })
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(self.prec, rows, cols, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    pub fn set_submatrix(&mut self, r0: usize, c0: usize, m: &MpMatrix) {
        for i in 0..m.rows {
            for j in 0..m.cols {
                self[(r0 + i, c0 + j)] = m[(i, j)].clone();
            }
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.prec, self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    fn check_same_shape(&self, other: &MpMatrix) -> Result<(), MplaError> {
        if self.shape() != other.shape() {
            return Err(MplaError::ShapeMismatch {
                expected: self.shape(),
                found: other.shape(),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &MpMatrix) -> Result<Self, MplaError> {
        self.check_same_shape(other)?;
        Ok(self.zip(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &MpMatrix) -> Result<Self, MplaError> {
        self.check_same_shape(other)?;
        Ok(self.zip(other, |a, b| a - b))
    }

    /// Sum of two matrices of equal shape; panics on mismatch.
    pub fn add(&self, other: &MpMatrix) -> Self {
        self.try_add(other).expect("matrix shapes differ")
    }

    /// Difference of two matrices of equal shape; panics on mismatch.
    pub fn sub(&self, other: &MpMatrix) -> Self {
        self.try_sub(other).expect("matrix shapes differ")
    }

    fn zip(&self, other: &MpMatrix, f: impl Fn(&MpScalar, &MpScalar) -> MpScalar) -> Self {
        MpMatrix {
            rows: self.rows,
            cols: self.cols,
            prec: self.prec.max(other.prec),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    /// In-place `self += alpha * other`.
    pub fn axpy(&mut self, alpha: &MpScalar, other: &MpMatrix) {
        assert_eq!(self.shape(), other.shape(), "matrix shapes differ");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            a.add_mul(alpha, b);
        }
    }

    pub fn scale(&self, s: &MpScalar) -> Self {
        MpMatrix {
            rows: self.rows,
            cols: self.cols,
            prec: self.prec,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        MpMatrix {
            rows: self.rows,
            cols: self.cols,
            prec: self.prec,
            data: self.data.iter().map(|x| -x).collect(),
        }
    }

    pub fn try_matmul(&self, other: &MpMatrix) -> Result<Self, MplaError> {
        if self.cols != other.rows {
            return Err(MplaError::ShapeMismatch {
                expected: (self.cols, other.cols),
                found: other.shape(),
            });
        }
        let prec = self.prec.max(other.prec);
        let mut out = MpMatrix::zeros(prec, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out.data[i * other.cols + j].add_mul(a, b);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Matrix product; panics on inner-dimension mismatch.
    pub fn matmul(&self, other: &MpMatrix) -> Self {
        self.try_matmul(other).expect("inner dimensions differ")
    }

    /// `selfᵀ · other` without forming the transpose.
    pub fn t_matmul(&self, other: &MpMatrix) -> Self {
        assert_eq!(self.rows, other.rows, "inner dimensions differ");
        let prec = self.prec.max(other.prec);
        let mut out = MpMatrix::zeros(prec, self.cols, other.cols);
        for k in 0..self.rows {
            for i in 0..self.cols {
                let a = &self[(k, i)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out.data[i * other.cols + j].add_mul(a, b);
                    }
                }
            }
        }
        out
    }

    /// `Qᵀ · self · Q` for square `self`.
    pub fn congruence(&self, q: &MpMatrix) -> Self {
        q.t_matmul(&self.matmul(q))
    }

    pub fn mul_vec(&self, v: &[MpScalar]) -> Vec<MpScalar> {
        assert_eq!(self.cols, v.len(), "vector length differs");
        (0..self.rows)
            .map(|i| {
                let mut acc = MpScalar::zero(self.prec);
                for (a, b) in self.row(i).iter().zip(v) {
                    acc.add_mul(a, b);
                }
                acc
            })
            .collect()
    }

    pub fn trace(&self) -> MpScalar {
        let mut acc = MpScalar::zero(self.prec);
        for i in 0..self.rows.min(self.cols) {
            acc += &self[(i, i)];
        }
        acc
    }

    /// Frobenius inner product `Σ a_ij b_ij`.
    pub fn try_frobenius_dot(&self, other: &MpMatrix) -> Result<MpScalar, MplaError> {
        self.check_same_shape(other)?;
        let mut acc = MpScalar::zero(self.prec.max(other.prec));
        for (a, b) in self.data.iter().zip(&other.data) {
            acc.add_mul(a, b);
        }
        Ok(acc)
    }

    pub fn frobenius_norm(&self) -> MpScalar {
        let mut acc = MpScalar::zero(self.prec);
        for a in &self.data {
            acc.add_mul(a, a);
        }
        acc.sqrt()
    }

    pub fn max_abs(&self) -> MpScalar {
        let mut m = MpScalar::zero(self.prec);
        for a in &self.data {
            let v = a.abs();
            if v > m {
                m = v;
            }
        }
        m
    }

    /// `max_ij |m_ij − m_ji|`; zero exactly for a symmetric matrix.
    pub fn asymmetry(&self) -> MpScalar {
        let mut m = MpScalar::zero(self.prec);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let d = (&self[(i, j)] - &self[(j, i)]).abs();
                if d > m {
                    m = d;
                }
            }
        }
        m
    }

    /// Exact symmetry test.
    pub fn is_symmetric(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if self[(i, j)] != self[(j, i)] {
                    return false;
                }
            }
        }
        true
    }

    pub fn require_symmetric(&self) -> Result<(), MplaError> {
        if !self.is_square() {
            return Err(MplaError::NotSquare(self.shape()));
        }
        if !self.is_symmetric() {
            return Err(MplaError::NonSymmetric);
        }
        Ok(())
    }

    /// `(M + Mᵀ)/2`, exactly symmetric.
    pub fn symmetrize(&self) -> Self {
        let half = MpScalar::ratio(self.prec, 1, 2);
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in i..self.cols {
                let v = (&self[(i, j)] + &self[(j, i)]) * &half;
                out[(i, j)] = v.clone();
                out[(j, i)] = v;
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Row-major vectorization.
    pub fn vec(&self) -> Vec<MpScalar> {
        self.data.clone()
    }

    pub fn to_f64_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.to_f64()).collect())
            .collect()
    }
}

impl Index<(usize, usize)> for MpMatrix {
    type Output = MpScalar;
    fn index(&self, (i, j): (usize, usize)) -> &MpScalar {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for MpMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut MpScalar {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for MpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "MpMatrix {}x{} @{}b", self.rows, self.cols, self.prec)?;
        for i in 0..self.rows {
            let row: Vec<String> = self.row(i).iter().map(|x| x.to_decimal(8)).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Euclidean inner product of two vectors.
pub fn dot_vec(a: &[MpScalar], b: &[MpScalar]) -> MpScalar {
    let prec = a.first().map_or(64, |x| x.prec());
    let mut acc = MpScalar::zero(prec);
    for (x, y) in a.iter().zip(b) {
        acc.add_mul(x, y);
    }
    acc
}

pub fn norm_vec(a: &[MpScalar]) -> MpScalar {
    dot_vec(a, a).sqrt()
}
