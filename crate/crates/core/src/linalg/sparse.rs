use super::{axpy, inner_dims, DenseMatrix, LinalgError, MatrixOperand, Result};

/// Compressed-sparse-row matrix.
///
/// Invariants: `row_offsets` has `rows + 1` non-decreasing entries ending
/// at `nnz`; column indices are strictly increasing within each row and
/// `< cols`; stored values are finite and non-zero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        let bad = |msg: String| Err(LinalgError::InvalidSparse(msg));
        if row_offsets.len() != rows + 1 {
            return bad(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                rows + 1
            ));
        }
        if col_indices.len() != values.len() {
            return bad(format!(
                "{} column indices but {} values",
                col_indices.len(),
                values.len()
            ));
        }
        if row_offsets[0] != 0 || row_offsets[rows] != values.len() {
            return bad("row_offsets must start at 0 and end at nnz".into());
        }
        for i in 0..rows {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return bad(format!("row_offsets decrease at row {i}"));
            }
            let idx = &col_indices[lo..hi];
            if idx.windows(2).any(|w| w[0] >= w[1]) {
                return bad(format!("column indices not strictly increasing in row {i}"));
            }
            if idx.last().is_some_and(|&c| c >= cols) {
                return bad(format!("column index out of range in row {i}"));
            }
        }
        if let Some(p) = values.iter().position(|v| !v.is_finite() || *v == 0.0) {
            return bad(format!("stored value at position {p} is zero or non-finite"));
        }
        Ok(Self {
            rows,
            cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds from `(row, col, value)` triplets. Duplicates are summed and
    /// entries that sum to zero are dropped.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(i, j, _) in &triplets {
            if i >= rows || j >= cols {
                return Err(LinalgError::InvalidSparse(format!(
                    "entry ({i}, {j}) outside {rows}x{cols}"
                )));
            }
        }
        triplets.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        let mut row_offsets = vec![0usize; rows + 1];
        let mut col_indices = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut rows_of = Vec::with_capacity(triplets.len());
        for (i, j, v) in triplets {
            if rows_of.last() == Some(&i) && col_indices.last() == Some(&j) {
                *values.last_mut().unwrap() += v;
            } else {
                rows_of.push(i);
                col_indices.push(j);
                values.push(v);
            }
        }
        let mut keep_cols = Vec::with_capacity(values.len());
        let mut keep_vals = Vec::with_capacity(values.len());
        for ((i, j), v) in rows_of.into_iter().zip(col_indices).zip(values) {
            if v != 0.0 {
                row_offsets[i + 1] += 1;
                keep_cols.push(j);
                keep_vals.push(v);
            }
        }
        for i in 0..rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Self::new(rows, cols, row_offsets, keep_cols, keep_vals)
    }

    pub fn from_dense(m: &DenseMatrix) -> Self {
        let mut row_offsets = Vec::with_capacity(m.rows() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for i in 0..m.rows() {
            for (j, &v) in m.row(i).iter().enumerate() {
                if v != 0.0 {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(values.len());
        }
        Self {
            rows: m.rows(),
            cols: m.cols(),
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Row-major iteration over stored `(row, col, value)` entries.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            let (idx, vals) = self.row(i);
            idx.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }
}

impl MatrixOperand for SparseMatrix {
    fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    fn product(
        &self,
        rhs: &DenseMatrix,
        transpose_self: bool,
        transpose_rhs: bool,
    ) -> Result<DenseMatrix> {
        let (m, _, n) = inner_dims(
            "sparse matmul",
            self.shape(),
            rhs.shape(),
            transpose_self,
            transpose_rhs,
        )?;
        let mut out = DenseMatrix::zeros(m, n);
        match (transpose_self, transpose_rhs) {
            (false, false) => {
                for i in 0..self.rows {
                    let (idx, vals) = self.row(i);
                    let orow = out.row_mut(i);
                    for (&p, &v) in idx.iter().zip(vals) {
                        axpy(v, rhs.row(p), orow);
                    }
                }
            }
            (true, false) => {
                for i in 0..self.rows {
                    let (idx, vals) = self.row(i);
                    let rrow = rhs.row(i);
                    for (&c, &v) in idx.iter().zip(vals) {
                        axpy(v, rrow, out.row_mut(c));
                    }
                }
            }
            (false, true) => {
                for i in 0..self.rows {
                    let (idx, vals) = self.row(i);
                    for j in 0..n {
                        let rrow = rhs.row(j);
                        let s: f64 = idx.iter().zip(vals).map(|(&p, &v)| v * rrow[p]).sum();
                        out.set(i, j, s);
                    }
                }
            }
            (true, true) => {
                for i in 0..self.rows {
                    let (idx, vals) = self.row(i);
                    for (&c, &v) in idx.iter().zip(vals) {
                        let orow = out.row_mut(c);
                        for (j, o) in orow.iter_mut().enumerate() {
                            *o += v * rhs.get(j, i);
                        }
                    }
                }
            }
        }
        Ok(out)
    }

    fn matvec(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            let (idx, vals) = self.row(i);
            *o = idx.iter().zip(vals).map(|(&p, &x)| x * v[p]).sum();
        }
    }

    fn t_matvec(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &vi) in v.iter().enumerate() {
            let (idx, vals) = self.row(i);
            for (&c, &x) in idx.iter().zip(vals) {
                out[c] += x * vi;
            }
        }
    }

    fn frobenius_norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    fn min_entry(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.rows, self.cols);
        for (i, j, v) in self.iter() {
            out.set(i, j, v);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius_norm_sq, matmul};

    fn sample() -> SparseMatrix {
        SparseMatrix::from_triplets(
            3,
            4,
            vec![(0, 1, 2.0), (2, 3, -1.0), (1, 0, 4.0), (2, 0, 0.5), (0, 3, 1.5)],
        )
        .unwrap()
    }

    #[test]
    fn sparse_row_times_ones() {
        let s = SparseMatrix::from_triplets(1, 3, vec![(0, 1, 5.0)]).unwrap();
        let ones = DenseMatrix::from_rows(&[[1.0], [1.0], [1.0]]);
        let out = matmul(&s, &ones, false, false).unwrap();
        let oracle = matmul(&s.to_dense(), &ones, false, false).unwrap();
        assert_eq!(out, DenseMatrix::from_rows(&[[5.0]]));
        assert_eq!(out, oracle);
    }

    #[test]
    fn all_transpose_combinations_match_dense() {
        let s = sample();
        let d = s.to_dense();
        let rhs_n = DenseMatrix::from_fn(4, 2, |i, j| (i * 2 + j) as f64 - 3.0);
        let rhs_t = DenseMatrix::from_fn(3, 2, |i, j| (i + 3 * j) as f64 * 0.5);
        let cases = [
            (false, false, &rhs_n),
            (true, false, &rhs_t),
        ];
        for (tl, tr, rhs) in cases {
            assert_eq!(
                matmul(&s, rhs, tl, tr).unwrap(),
                matmul(&d, rhs, tl, tr).unwrap()
            );
        }
        let rhs_nt = rhs_n.transpose();
        let rhs_tt = rhs_t.transpose();
        assert_eq!(
            matmul(&s, &rhs_nt, false, true).unwrap(),
            matmul(&d, &rhs_nt, false, true).unwrap()
        );
        assert_eq!(
            matmul(&s, &rhs_tt, true, true).unwrap(),
            matmul(&d, &rhs_tt, true, true).unwrap()
        );
    }

    #[test]
    fn duplicates_summed_zeros_dropped() {
        let s = SparseMatrix::from_triplets(2, 2, vec![(0, 0, 2.0), (0, 0, 3.0), (1, 1, 1.0), (1, 1, -1.0)])
            .unwrap();
        assert_eq!(s.nnz(), 1);
        assert_eq!(s.to_dense().get(0, 0), 5.0);
    }

    #[test]
    fn rejects_invalid_structure() {
        assert!(SparseMatrix::new(1, 3, vec![0, 2], vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::new(1, 3, vec![0, 1], vec![3], vec![1.0]).is_err());
        assert!(SparseMatrix::new(1, 3, vec![0, 1], vec![0], vec![0.0]).is_err());
        assert!(SparseMatrix::from_triplets(2, 2, vec![(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn norm_matches_dense() {
        let s = sample();
        assert_eq!(frobenius_norm_sq(&s), frobenius_norm_sq(&s.to_dense()));
    }

    #[test]
    fn matvecs_match_dense() {
        let s = sample();
        let d = s.to_dense();
        let v = [1.0, -2.0, 0.5, 3.0];
        let (mut a, mut b) = (vec![0.0; 3], vec![0.0; 3]);
        s.matvec(&v, &mut a);
        d.matvec(&v, &mut b);
        assert_eq!(a, b);
        let u = [0.25, 1.0, -1.0];
        let (mut a, mut b) = (vec![0.0; 4], vec![0.0; 4]);
        s.t_matvec(&u, &mut a);
        d.t_matvec(&u, &mut b);
        assert_eq!(a, b);
    }
}
