//! Dense and sparse matrix kernels.
//!
//! Everything above this module (sketching, solvers, metrics) is written
//! against the small set of products, norms and column operations defined
//! here. Dense storage is row-major: `values[i * cols + j]` holds entry
//! `(i, j)`. Sparse storage is CSR, see [`SparseMatrix`].
//!
//! Products accumulate over the inner index in ascending order, so the
//! transposed variants produce the same bits as multiplying explicitly
//! transposed copies.

mod qr;
mod sparse;

pub use qr::thin_qr;
pub use sparse::SparseMatrix;

use thiserror::Error;

/// Errors raised by the kernel layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("{op}: dimension mismatch between {}x{} and {}x{}", .left.0, .left.1, .right.0, .right.1)]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("data length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("invalid sparse structure: {0}")]
    InvalidSparse(String),
    #[error("thin QR needs rows >= cols, got {rows}x{cols}")]
    WideMatrix { rows: usize, cols: usize },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    /// Wraps row-major `values`, rejecting wrong lengths and non-finite entries.
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(LinalgError::LengthMismatch {
                expected: rows * cols,
                got: values.len(),
            });
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(LinalgError::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self { rows, cols, values })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            values: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    /// Builds a matrix from equally long rows.
    ///
    /// Panics on ragged input; intended for literals in tests and examples.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "row {i} has {} entries, expected {cols}", r.len());
            values.extend_from_slice(r);
        }
        Self {
            rows: rows.len(),
            cols,
            values,
        }
    }

    /// Builds a matrix entry by entry.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                values.push(f(i, j));
            }
        }
        Self { rows, cols, values }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.cols + j] = v;
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.values[j * self.rows + i] = self.values[i * self.cols + j];
            }
        }
        out
    }

    /// Copy of column `j`.
    pub fn column(&self, j: usize) -> Result<Vec<f64>> {
        if j >= self.cols {
            return Err(LinalgError::IndexOutOfRange {
                index: j,
                len: self.cols,
            });
        }
        let mut out = vec![0.0; self.rows];
        self.column_into(j, &mut out);
        Ok(out)
    }

    /// Overwrites column `j` with `v`.
    pub fn set_column(&mut self, j: usize, v: &[f64]) -> Result<()> {
        if j >= self.cols {
            return Err(LinalgError::IndexOutOfRange {
                index: j,
                len: self.cols,
            });
        }
        if v.len() != self.rows {
            return Err(LinalgError::LengthMismatch {
                expected: self.rows,
                got: v.len(),
            });
        }
        self.write_column(j, v);
        Ok(())
    }

    /// Unchecked column gather used by the solver inner loops.
    #[inline]
    pub(crate) fn column_into(&self, j: usize, out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.values[i * self.cols + j];
        }
    }

    #[inline]
    pub(crate) fn write_column(&mut self, j: usize, v: &[f64]) {
        for (i, &x) in v.iter().enumerate() {
            self.values[i * self.cols + j] = x;
        }
    }

    /// Entrywise `self - other`.
    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_same_shape("sub", other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            values,
        })
    }

    pub fn scale(&self, c: f64) -> DenseMatrix {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &DenseMatrix) -> Result<f64> {
        self.check_same_shape("max_abs_diff", other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs())))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    fn check_same_shape(&self, op: &'static str, other: &DenseMatrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(LinalgError::DimensionMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            });
        }
        Ok(())
    }
}

/// A data matrix the solvers can multiply against: dense or CSR.
pub trait MatrixOperand: Send + Sync {
    fn shape(&self) -> (usize, usize);

    /// `op(self) · op(rhs)` with the given transpositions.
    fn product(&self, rhs: &DenseMatrix, transpose_self: bool, transpose_rhs: bool)
        -> Result<DenseMatrix>;

    /// `out = self · v`.
    fn matvec(&self, v: &[f64], out: &mut [f64]);

    /// `out = selfᵀ · v`.
    fn t_matvec(&self, v: &[f64], out: &mut [f64]);

    fn frobenius_norm_sq(&self) -> f64;

    /// Smallest stored entry (`+inf` when nothing is stored).
    fn min_entry(&self) -> f64;

    fn to_dense(&self) -> DenseMatrix;

    /// `Some` when the operand is dense, so callers can pick a direct path.
    fn as_dense(&self) -> Option<&DenseMatrix> {
        None
    }
}

/// `op(m) · op(n)` where `op` optionally transposes.
///
/// A sparse left operand is used in place; it is never densified.
pub fn matmul<M: MatrixOperand + ?Sized>(
    m: &M,
    n: &DenseMatrix,
    transpose_left: bool,
    transpose_right: bool,
) -> Result<DenseMatrix> {
    m.product(n, transpose_left, transpose_right)
}

/// Sum of squared entries.
pub fn frobenius_norm_sq<M: MatrixOperand + ?Sized>(m: &M) -> f64 {
    m.frobenius_norm_sq()
}

/// `max(v_i, 0)` entrywise. Non-positive entries (including `-0.0`) map to `+0.0`.
pub fn clamp_nonnegative(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| positive_part(x)).collect()
}

#[inline]
pub(crate) fn positive_part(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn inner_dims(
    op: &'static str,
    left: (usize, usize),
    right: (usize, usize),
    transpose_left: bool,
    transpose_right: bool,
) -> Result<(usize, usize, usize)> {
    let (lr, lc) = if transpose_left { (left.1, left.0) } else { left };
    let (rr, rc) = if transpose_right { (right.1, right.0) } else { right };
    if lc != rr {
        return Err(LinalgError::DimensionMismatch {
            op,
            left: (lr, lc),
            right: (rr, rc),
        });
    }
    Ok((lr, lc, rc))
}

impl MatrixOperand for DenseMatrix {
    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn product(
        &self,
        rhs: &DenseMatrix,
        transpose_self: bool,
        transpose_rhs: bool,
    ) -> Result<DenseMatrix> {
        let (m, inner, n) =
            inner_dims("matmul", self.shape(), rhs.shape(), transpose_self, transpose_rhs)?;
        let mut out = DenseMatrix::zeros(m, n);
        match (transpose_self, transpose_rhs) {
            (false, false) => {
                for i in 0..m {
                    let row = self.row(i);
                    let orow = &mut out.values[i * n..(i + 1) * n];
                    for (p, &x) in row.iter().enumerate() {
                        axpy(x, rhs.row(p), orow);
                    }
                }
            }
            (true, false) => {
                for p in 0..inner {
                    let srow = self.row(p);
                    let rrow = rhs.row(p);
                    for (i, &x) in srow.iter().enumerate() {
                        axpy(x, rrow, &mut out.values[i * n..(i + 1) * n]);
                    }
                }
            }
            (false, true) => {
                for i in 0..m {
                    let row = self.row(i);
                    for j in 0..n {
                        out.values[i * n + j] = dot(row, rhs.row(j));
                    }
                }
            }
            (true, true) => {
                for i in 0..m {
                    for j in 0..n {
                        let rrow = rhs.row(j);
                        let mut s = 0.0;
                        for (p, &r) in rrow.iter().enumerate() {
                            s += self.values[p * self.cols + i] * r;
                        }
                        out.values[i * n + j] = s;
                    }
                }
            }
        }
        Ok(out)
    }

    fn matvec(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), v);
        }
    }

    fn t_matvec(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &x) in v.iter().enumerate() {
            axpy(x, self.row(i), out);
        }
    }

    fn frobenius_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    fn min_entry(&self) -> f64 {
        self.min_value()
    }

    fn to_dense(&self) -> DenseMatrix {
        self.clone()
    }

    fn as_dense(&self) -> Option<&DenseMatrix> {
        Some(self)
    }
}

/// The factors `A` (d×k) and `B` (n×k) of `X ≈ A Bᵀ`.
///
/// `B` is stored n×k so that its component columns line up with `A`'s.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorPair {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
}

impl FactorPair {
    pub fn new(a: DenseMatrix, b: DenseMatrix) -> Result<Self> {
        if a.cols() != b.cols() {
            return Err(LinalgError::DimensionMismatch {
                op: "factor pair",
                left: a.shape(),
                right: b.shape(),
            });
        }
        Ok(Self { a, b })
    }

    /// Number of components.
    pub fn k(&self) -> usize {
        self.a.cols()
    }

    /// `A Bᵀ`, materialized. Only for small problems and tests.
    pub fn reconstruct(&self) -> DenseMatrix {
        self.a
            .product(&self.b, false, true)
            .expect("factor pair shapes are consistent")
    }

    pub fn is_nonnegative(&self) -> bool {
        self.a.min_value() >= 0.0 && self.b.min_value() >= 0.0
    }

    /// Largest entrywise difference relative to the largest entry, over both factors.
    pub fn relative_diff(&self, other: &FactorPair) -> f64 {
        let da = self.a.max_abs_diff(&other.a).unwrap_or(f64::INFINITY);
        let db = self.b.max_abs_diff(&other.b).unwrap_or(f64::INFINITY);
        let scale = self.a.max_abs().max(self.b.max_abs()).max(f64::MIN_POSITIVE);
        da.max(db) / scale
    }
}
