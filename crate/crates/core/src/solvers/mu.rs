use super::projected::{CompressedData, ProjectedFactors};
use super::SolverError;
use crate::linalg::{matmul, DenseMatrix, FactorPair, MatrixOperand};

/// Denominator guard for the multiplicative rules.
pub const MU_EPSILON: f64 = 1e-12;

/// One Lee–Seung sweep: `A ← A ∘ XB ⊘ (ABᵀB + ε)`, then
/// `B ← B ∘ XᵀA ⊘ (BAᵀA + ε)`.
pub fn mu_step<X: MatrixOperand + ?Sized>(
    x: &X,
    factors: &mut FactorPair,
) -> Result<(), SolverError> {
    let xb = x.product(&factors.b, false, false)?;
    let g = matmul(&factors.b, &factors.b, true, false)?;
    let agg = matmul(&factors.a, &g, false, false)?;
    ratio_update(&mut factors.a, &xb, &agg);

    let xta = x.product(&factors.a, true, false)?;
    let w = matmul(&factors.a, &factors.a, true, false)?;
    let bw = matmul(&factors.b, &w, false, false)?;
    ratio_update(&mut factors.b, &xta, &bw);
    Ok(())
}

/// One semi-NMF sweep on compressed data.
///
/// The cross products `X̌B̌` and `X̂ᵀÂ` and the Gram matrices are mixed-sign,
/// so each is split into positive and negative parts and the factor is
/// scaled by the square root of the ratio.
pub fn mu_rp_step(
    data: &CompressedData<'_>,
    factors: &mut FactorPair,
    projected: &mut ProjectedFactors,
) -> Result<(), SolverError> {
    let p = data.projectors();

    let h = matmul(data.right(), &projected.b_check, false, false)?;
    let g = matmul(&projected.b_check, &projected.b_check, true, false)?;
    semi_update(&mut factors.a, &h, &g)?;
    projected.refresh_a(p, &factors.a);

    let h = matmul(data.left(), &projected.a_hat, true, false)?;
    let g = matmul(&projected.a_hat, &projected.a_hat, true, false)?;
    semi_update(&mut factors.b, &h, &g)?;
    projected.refresh_b(p, &factors.b);
    Ok(())
}

fn ratio_update(f: &mut DenseMatrix, num: &DenseMatrix, den: &DenseMatrix) {
    for ((v, &n), &d) in f
        .as_mut_slice()
        .iter_mut()
        .zip(num.as_slice())
        .zip(den.as_slice())
    {
        *v *= n / (d + MU_EPSILON);
    }
}

fn split(m: &DenseMatrix) -> (DenseMatrix, DenseMatrix) {
    let pos = DenseMatrix::from_fn(m.rows(), m.cols(), |i, j| {
        let v = m.get(i, j);
        (v.abs() + v) / 2.0
    });
    let neg = DenseMatrix::from_fn(m.rows(), m.cols(), |i, j| {
        let v = m.get(i, j);
        (v.abs() - v) / 2.0
    });
    (pos, neg)
}

/// `F ← F ∘ sqrt((H⁺ + F G⁻) ⊘ (H⁻ + F G⁺ + ε))`.
fn semi_update(f: &mut DenseMatrix, h: &DenseMatrix, g: &DenseMatrix) -> Result<(), SolverError> {
    let (hp, hn) = split(h);
    let (gp, gn) = split(g);
    let fgn = matmul(f, &gn, false, false)?;
    let fgp = matmul(f, &gp, false, false)?;
    let it = f
        .as_mut_slice()
        .iter_mut()
        .zip(hp.as_slice().iter().zip(hn.as_slice()))
        .zip(fgn.as_slice().iter().zip(fgp.as_slice()));
    for ((v, (&hp, &hn)), (&fgn, &fgp)) in it {
        *v *= ((hp + fgn) / (hn + fgp + MU_EPSILON)).sqrt();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compression::ProjectorPair;
    use crate::metrics::reconstruction_error;
    use crate::solvers::initialize;

    fn exact_fit() -> (DenseMatrix, FactorPair) {
        let f = initialize(8, 6, 2, 4);
        (f.reconstruct(), f)
    }

    #[test]
    fn exact_fit_is_a_fixed_point() {
        let (x, f0) = exact_fit();
        let mut f = f0.clone();
        mu_step(&x, &mut f).unwrap();
        assert!(f.relative_diff(&f0) < 1e-12);
    }

    #[test]
    fn zero_entries_stay_zero() {
        let x = DenseMatrix::from_fn(7, 5, |i, j| 1.0 + ((i * 3 + j) % 4) as f64);
        let mut f = initialize(7, 5, 2, 9);
        f.a.set(3, 1, 0.0);
        f.b.set(2, 0, 0.0);
        for _ in 0..5 {
            mu_step(&x, &mut f).unwrap();
        }
        assert_eq!(f.a.get(3, 1), 0.0);
        assert_eq!(f.b.get(2, 0), 0.0);
    }

    #[test]
    fn semi_nmf_exact_fit_keeps_a() {
        let (x, f0) = exact_fit();
        let p = ProjectorPair::new(DenseMatrix::identity(8), DenseMatrix::identity(6)).unwrap();
        let c = CompressedData::new(&x, &p).unwrap();
        let mut f = f0.clone();
        let mut pf = ProjectedFactors::compute(&p, &f).unwrap();
        mu_rp_step(&c, &mut f, &mut pf).unwrap();
        assert!(f.relative_diff(&f0) < 1e-10);
        assert!(f.is_nonnegative());
    }

    #[test]
    fn mu_decreases_error() {
        let x = DenseMatrix::from_fn(20, 15, |i, j| ((i * 7 + j * 13) % 11) as f64 / 3.0);
        let mut f = initialize(20, 15, 3, 2);
        let mut prev = reconstruction_error(&x, &f);
        for _ in 0..50 {
            mu_step(&x, &mut f).unwrap();
            let e = reconstruction_error(&x, &f);
            assert!(e <= prev + 1e-10);
            prev = e;
        }
    }
}
