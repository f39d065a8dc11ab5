use super::constraints::{hals_b_update, hals_b_update_unconstrained, Penalty};
use super::init::{revive_column, SolverRng};
use super::projected::{CompressedData, ProjectedFactors};
use super::{SolverError, DEAD_COMPONENT_TOL};
use crate::linalg::{axpy, dot, matmul, FactorPair, MatrixOperand};

/// One HALS sweep on uncompressed data.
///
/// The rank-one residual product is never formed as a matrix:
/// `X_j b_j = X b_j − A (Bᵀ b_j) + a_j (b_jᵀ b_j)`, and likewise for `X_jᵀ a_j`.
pub fn hals_step<X: MatrixOperand + ?Sized>(
    x: &X,
    factors: &mut FactorPair,
    penalty: Penalty,
    rng: &mut SolverRng,
) -> Result<(), SolverError> {
    let (d, n) = x.shape();
    let k = factors.k();
    let mut fixed = vec![0.0; n.max(d)];
    let mut moving = vec![0.0; d.max(n)];
    let mut gram = vec![0.0; k];
    let mut proj = vec![0.0; d.max(n)];

    // A-half: b_j fixed, a_j moving.
    for j in 0..k {
        let b_j = &mut fixed[..n];
        factors.b.column_into(j, b_j);
        let mut bb = dot(b_j, b_j);
        if bb < DEAD_COMPONENT_TOL {
            revive_column(&mut factors.b, j, rng);
            factors.b.column_into(j, b_j);
            bb = dot(b_j, b_j);
        }
        let num = &mut moving[..d];
        x.matvec(b_j, num);
        factors.b.t_matvec(b_j, &mut gram);
        let ag = &mut proj[..d];
        factors.a.matvec(&gram, ag);
        let mut a_j = vec![0.0; d];
        factors.a.column_into(j, &mut a_j);
        for ((v, &g), &a) in num.iter_mut().zip(ag.iter()).zip(&a_j) {
            *v = *v - g + a * bb;
        }
        hals_b_update_unconstrained(num, bb);
        factors.a.write_column(j, num);
    }

    // B-half: a_j fixed, b_j moving.
    for j in 0..k {
        let a_j = &mut fixed[..d];
        factors.a.column_into(j, a_j);
        let mut aa = dot(a_j, a_j);
        if aa < DEAD_COMPONENT_TOL {
            revive_column(&mut factors.a, j, rng);
            factors.a.column_into(j, a_j);
            aa = dot(a_j, a_j);
        }
        let num = &mut moving[..n];
        x.t_matvec(a_j, num);
        factors.a.t_matvec(a_j, &mut gram);
        let bg = &mut proj[..n];
        factors.b.matvec(&gram, bg);
        let mut b_j = vec![0.0; n];
        factors.b.column_into(j, &mut b_j);
        for ((v, &g), &b) in num.iter_mut().zip(bg.iter()).zip(&b_j) {
            *v = *v - g + b * aa;
        }
        hals_b_update(num, aa, penalty);
        factors.b.write_column(j, num);
    }
    Ok(())
}

/// One HALS sweep on compressed data.
///
/// Each component forms its projected residual explicitly:
/// `X̌_j = X̌ − A B̌ᵀ + a_j b̌_jᵀ` (d×q) for the A-half and
/// `X̂_j = X̂ − Â Bᵀ + â_j b_jᵀ` (q×n) for the B-half.
pub fn hals_rp_step(
    data: &CompressedData<'_>,
    factors: &mut FactorPair,
    projected: &mut ProjectedFactors,
    penalty: Penalty,
    rng: &mut SolverRng,
) -> Result<(), SolverError> {
    let p = data.projectors();
    let k = factors.k();
    let (d, n) = (factors.a.rows(), factors.b.rows());
    let q_l = projected.a_hat.rows();

    for j in 0..k {
        let mut bc_j = projected.b_check.column(j)?;
        let mut bb = dot(&bc_j, &bc_j);
        if bb < DEAD_COMPONENT_TOL {
            revive_column(&mut factors.b, j, rng);
            projected.refresh_b(p, &factors.b);
            bc_j = projected.b_check.column(j)?;
            bb = dot(&bc_j, &bc_j);
        }
        let a_j = factors.a.column(j)?;
        let mut residual = data.right().sub(&matmul(&factors.a, &projected.b_check, false, true)?)?;
        for i in 0..d {
            axpy(a_j[i], &bc_j, residual.row_mut(i));
        }
        let mut num = vec![0.0; d];
        residual.matvec(&bc_j, &mut num);
        hals_b_update_unconstrained(&mut num, bb);
        factors.a.write_column(j, &num);
    }
    projected.refresh_a(p, &factors.a);

    for j in 0..k {
        let mut ah_j = projected.a_hat.column(j)?;
        let mut aa = dot(&ah_j, &ah_j);
        if aa < DEAD_COMPONENT_TOL {
            revive_column(&mut factors.a, j, rng);
            projected.refresh_a(p, &factors.a);
            ah_j = projected.a_hat.column(j)?;
            aa = dot(&ah_j, &ah_j);
        }
        let b_j = factors.b.column(j)?;
        let mut residual = data.left().sub(&matmul(&projected.a_hat, &factors.b, false, true)?)?;
        for i in 0..q_l {
            axpy(ah_j[i], &b_j, residual.row_mut(i));
        }
        let mut num = vec![0.0; n];
        residual.t_matvec(&ah_j, &mut num);
        hals_b_update(&mut num, aa, penalty);
        factors.b.write_column(j, &num);
    }
    projected.refresh_b(p, &factors.b);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::compression::ProjectorPair;
    use crate::metrics::reconstruction_error;
    use crate::solvers::{initialize, reinit_rng};

    #[test]
    fn rank_one_consistent_data_solved_in_one_update() {
        let a_star = DenseMatrix::from_rows(&[[1.0], [2.0], [0.5], [3.0]]);
        let b_star = DenseMatrix::from_rows(&[[2.0], [1.0], [4.0]]);
        let x = matmul(&a_star, &b_star, false, true).unwrap();
        let mut f = FactorPair {
            a: DenseMatrix::from_rows(&[[0.3], [0.3], [0.3], [0.3]]),
            b: b_star.clone(),
        };
        hals_step(&x, &mut f, Penalty::NONE, &mut reinit_rng(0)).unwrap();
        assert!(f.a.max_abs_diff(&a_star).unwrap() < 1e-12);
        assert!(f.b.max_abs_diff(&b_star).unwrap() < 1e-12);
    }

    #[test]
    fn negative_projections_clamp_to_zero() {
        // column 1 of X is zero, so b's second entry must clamp
        let x = DenseMatrix::from_rows(&[[1.0, 0.0], [1.0, 0.0]]);
        let mut f = FactorPair {
            a: DenseMatrix::from_rows(&[[1.0], [1.0]]),
            b: DenseMatrix::from_rows(&[[1.0], [1.0]]),
        };
        hals_step(&x, &mut f, Penalty::NONE, &mut reinit_rng(0)).unwrap();
        assert_eq!(f.b.get(1, 0), 0.0);
        assert!(f.b.get(1, 0).is_sign_positive());
    }

    #[test]
    fn objective_non_increasing() {
        let x = DenseMatrix::from_fn(20, 15, |i, j| ((i * 5 + j * 3) % 7) as f64 + 0.5);
        let mut f = initialize(20, 15, 3, 8);
        let mut rng = reinit_rng(8);
        let mut prev = reconstruction_error(&x, &f);
        for _ in 0..100 {
            hals_step(&x, &mut f, Penalty::NONE, &mut rng).unwrap();
            let e = reconstruction_error(&x, &f);
            assert!(e <= prev + 1e-10, "{e} > {prev}");
            prev = e;
        }
    }

    #[test]
    fn dead_b_component_is_revived() {
        let x = DenseMatrix::from_fn(6, 5, |i, j| (i + j) as f64 + 1.0);
        let mut f = initialize(6, 5, 2, 1);
        for i in 0..5 {
            f.b.set(i, 1, 0.0);
        }
        let p = ProjectorPair::new(DenseMatrix::identity(6), DenseMatrix::identity(5)).unwrap();
        let c = CompressedData::new(&x, &p).unwrap();
        let mut pf = ProjectedFactors::compute(&p, &f).unwrap();
        hals_rp_step(&c, &mut f, &mut pf, Penalty::NONE, &mut reinit_rng(1)).unwrap();
        assert!(f.a.is_finite() && f.b.is_finite());
        assert!(f.a.column(1).unwrap().iter().any(|&v| v > 0.0));
    }
}
