use super::constraints::{fasthals_b_update, fasthals_b_update_unconstrained, Penalty};
use super::init::{revive_column, SolverRng};
use super::projected::{CompressedData, ProjectedFactors};
use super::{SolverError, DEAD_COMPONENT_TOL};
use crate::linalg::{dot, matmul, DenseMatrix, FactorPair, MatrixOperand};

/// One FastHALS sweep: `P = XB`, `G = BᵀB` feed every `a_j` update, then
/// `P = XᵀA`, `W = AᵀA` feed every `b_j` update.
pub fn fasthals_step<X: MatrixOperand + ?Sized>(
    x: &X,
    factors: &mut FactorPair,
    normalize_a: bool,
    penalty: Penalty,
    rng: &mut SolverRng,
) -> Result<(), SolverError> {
    let mut g = matmul(&factors.b, &factors.b, true, false)?;
    if revive_dead(&mut factors.b, &g, rng) {
        g = matmul(&factors.b, &factors.b, true, false)?;
    }
    let p = x.product(&factors.b, false, false)?;
    sweep_a(&mut factors.a, &p, &g, normalize_a);

    let mut w = matmul(&factors.a, &factors.a, true, false)?;
    if revive_dead(&mut factors.a, &w, rng) {
        w = matmul(&factors.a, &factors.a, true, false)?;
    }
    let p = x.product(&factors.a, true, false)?;
    sweep_b(&mut factors.b, &p, &w, penalty);
    Ok(())
}

/// One FastHALS sweep on compressed data: `H = X̌B̌`, `G = B̌ᵀB̌` for A;
/// `P = X̂ᵀÂ`, `W = ÂᵀÂ` for B.
pub fn fasthals_rp_step(
    data: &CompressedData<'_>,
    factors: &mut FactorPair,
    projected: &mut ProjectedFactors,
    normalize_a: bool,
    penalty: Penalty,
    rng: &mut SolverRng,
) -> Result<(), SolverError> {
    let proj = data.projectors();

    let mut g = matmul(&projected.b_check, &projected.b_check, true, false)?;
    if revive_dead(&mut factors.b, &g, rng) {
        projected.refresh_b(proj, &factors.b);
        g = matmul(&projected.b_check, &projected.b_check, true, false)?;
    }
    let h = matmul(data.right(), &projected.b_check, false, false)?;
    sweep_a(&mut factors.a, &h, &g, normalize_a);
    projected.refresh_a(proj, &factors.a);

    let mut w = matmul(&projected.a_hat, &projected.a_hat, true, false)?;
    if revive_dead(&mut factors.a, &w, rng) {
        projected.refresh_a(proj, &factors.a);
        w = matmul(&projected.a_hat, &projected.a_hat, true, false)?;
    }
    let p = matmul(data.left(), &projected.a_hat, true, false)?;
    sweep_b(&mut factors.b, &p, &w, penalty);
    projected.refresh_b(proj, &factors.b);
    Ok(())
}

/// Revives every column of `m` whose Gram diagonal is below the dead
/// tolerance. Returns whether anything changed.
fn revive_dead(m: &mut DenseMatrix, gram: &DenseMatrix, rng: &mut SolverRng) -> bool {
    let mut any = false;
    for j in 0..m.cols() {
        if gram.get(j, j) < DEAD_COMPONENT_TOL {
            revive_column(m, j, rng);
            any = true;
        }
    }
    any
}

/// `r = P_j − F G_j` using the current (partly updated) `F`.
fn residual_column(f: &DenseMatrix, p: &DenseMatrix, g: &DenseMatrix, j: usize, out: &mut [f64]) {
    let g_j = g.row(j); // G symmetric
    for (i, o) in out.iter_mut().enumerate() {
        *o = p.get(i, j) - dot(f.row(i), g_j);
    }
}

fn sweep_a(a: &mut DenseMatrix, p: &DenseMatrix, g: &DenseMatrix, normalize: bool) {
    let d = a.rows();
    let mut r = vec![0.0; d];
    let mut col = vec![0.0; d];
    for j in 0..a.cols() {
        residual_column(a, p, g, j, &mut r);
        a.column_into(j, &mut col);
        fasthals_b_update_unconstrained(&mut col, &r, g.get(j, j));
        if normalize {
            let norm = dot(&col, &col).sqrt();
            if norm > DEAD_COMPONENT_TOL {
                col.iter_mut().for_each(|v| *v /= norm);
            }
        }
        a.write_column(j, &col);
    }
}

fn sweep_b(b: &mut DenseMatrix, p: &DenseMatrix, w: &DenseMatrix, penalty: Penalty) {
    let n = b.rows();
    let mut r = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..b.cols() {
        residual_column(b, p, w, j, &mut r);
        b.column_into(j, &mut col);
        fasthals_b_update(&mut col, &r, w.get(j, j), penalty);
        b.write_column(j, &col);
    }
}
