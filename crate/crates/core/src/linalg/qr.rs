use super::{dot, DenseMatrix, LinalgError, MatrixOperand, Result};

/// Relative threshold under which a column's residual counts as zero.
const RANK_TOL: f64 = 1e-12;

/// Thin QR factorization `M = Q R` by Householder reflections.
///
/// `M` is m×n with `m >= n`. `Q` is m×n with orthonormal columns and `R`
/// is n×n upper triangular with a non-negative diagonal.
///
/// When a column's residual (the part not yet spanned by the previous
/// columns) has norm below `1e-12 * ‖M‖_F`, no reflector is built for it.
/// The matching column of `Q` is then the image of the canonical basis vector
/// `e_j` under the previous reflectors, so `Q` still has `n` orthonormal
/// columns and the result is deterministic.
pub fn thin_qr(m: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    let (rows, cols) = m.shape();
    if rows < cols {
        return Err(LinalgError::WideMatrix { rows, cols });
    }
    let tol = RANK_TOL * m.frobenius_norm_sq().sqrt();

    // column-major working copy
    let mut work: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut c = vec![0.0; rows];
            m.column_into(j, &mut c);
            c
        })
        .collect();
    let mut reflectors: Vec<Option<Vec<f64>>> = Vec::with_capacity(cols);
    let mut r = DenseMatrix::zeros(cols, cols);

    for j in 0..cols {
        let tail = &work[j][j..];
        let norm = dot(tail, tail).sqrt();
        if norm <= tol {
            reflectors.push(None);
            for c in j + 1..cols {
                r.set(j, c, work[c][j]);
            }
            continue;
        }
        let alpha = if tail[0] > 0.0 { -norm } else { norm };
        let mut v = tail.to_vec();
        v[0] -= alpha;
        let vnorm = dot(&v, &v).sqrt();
        v.iter_mut().for_each(|x| *x /= vnorm);

        r.set(j, j, alpha);
        for c in j + 1..cols {
            reflect(&v, &mut work[c][j..]);
            r.set(j, c, work[c][j]);
        }
        reflectors.push(Some(v));
    }

    // Q = H_0 H_1 ... H_{n-1} [e_0 .. e_{n-1}]
    let mut q_cols: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut e = vec![0.0; rows];
            e[j] = 1.0;
            e
        })
        .collect();
    for (j, refl) in reflectors.iter().enumerate().rev() {
        if let Some(v) = refl {
            for qc in q_cols.iter_mut() {
                reflect(v, &mut qc[j..]);
            }
        }
    }

    for j in 0..cols {
        if r.get(j, j) < 0.0 {
            q_cols[j].iter_mut().for_each(|x| *x = -*x);
            for c in j..cols {
                r.set(j, c, -r.get(j, c));
            }
        }
    }

    let mut q = DenseMatrix::zeros(rows, cols);
    for (j, qc) in q_cols.iter().enumerate() {
        q.write_column(j, qc);
    }
    Ok((q, r))
}

/// `x ← (I − 2 v vᵀ) x` for unit `v`.
#[inline]
fn reflect(v: &[f64], x: &mut [f64]) {
    let s = 2.0 * dot(v, x);
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= s * vi;
    }
}
