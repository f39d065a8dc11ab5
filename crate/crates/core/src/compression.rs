//! Random projection operators.
//!
//! The left projector `L` (d×q) is an orthonormal basis for the range of
//! `(X Xᵀ)^w X Ω`, the right projector `R` (q×n) the transposed basis for
//! `(Xᵀ X)^w Xᵀ Ω'`. Power steps are run as subspace iteration with a QR
//! after every product, which spans the same subspace as the explicit
//! power without under/overflowing for large `w`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::linalg::{matmul, thin_qr, DenseMatrix, LinalgError, MatrixOperand};

/// Tolerance used when validating orthonormality of supplied projectors.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompressionError {
    #[error("sketch width q = {q} must satisfy 0 < q <= min(d, n) = {limit}")]
    InvalidWidth { q: usize, limit: usize },
    #[error("projector is not orthonormal (defect {defect:e})")]
    NotOrthonormal { defect: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Sketch parameters: width `q = r + r_ov`, power iterations `w`, seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SketchConfig {
    pub q: usize,
    pub power_iterations: usize,
    pub seed: u64,
}

impl SketchConfig {
    pub fn new(q: usize, power_iterations: usize, seed: u64) -> Self {
        Self {
            q,
            power_iterations,
            seed,
        }
    }

    /// Checks `0 < q <= min(rows, cols)`.
    pub fn validate_for(&self, rows: usize, cols: usize) -> Result<(), CompressionError> {
        let limit = rows.min(cols);
        if self.q == 0 || self.q > limit {
            return Err(CompressionError::InvalidWidth { q: self.q, limit });
        }
        Ok(())
    }

    /// Sub-seeds for the sketches of `X` and `Xᵀ`.
    pub fn sub_seeds(&self) -> (u64, u64) {
        let base = self.seed.wrapping_mul(2);
        (base, base.wrapping_add(1))
    }
}

/// `rows × cols` matrix of i.i.d. standard normal draws.
pub fn gaussian_sketch(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values: Vec<f64> = (0..rows * cols)
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    DenseMatrix::new(rows, cols, values).expect("normal draws are finite")
}

/// Orthonormal d×q basis approximating the range of `(X Xᵀ)^w X Ω`.
pub fn powered_range_finder<X: MatrixOperand + ?Sized>(
    x: &X,
    cfg: &SketchConfig,
) -> Result<DenseMatrix, CompressionError> {
    let (d, n) = x.shape();
    cfg.validate_for(d, n)?;
    range_basis(x, false, cfg.q, cfg.power_iterations, cfg.seed)
}

/// Range finder for `op(X)`, where `op` optionally transposes. The
/// transposed case never forms `Xᵀ`.
fn range_basis<X: MatrixOperand + ?Sized>(
    x: &X,
    transposed: bool,
    q: usize,
    power_iterations: usize,
    seed: u64,
) -> Result<DenseMatrix, CompressionError> {
    let (d, n) = x.shape();
    let inner = if transposed { d } else { n };
    let omega = gaussian_sketch(inner, q, seed);
    let mut basis = thin_qr(&x.product(&omega, transposed, false)?)?.0;
    for _ in 0..power_iterations {
        let back = thin_qr(&x.product(&basis, !transposed, false)?)?.0;
        basis = thin_qr(&x.product(&back, transposed, false)?)?.0;
    }
    Ok(basis)
}

/// The left (d×q_l) and right (q_r×n) projectors.
///
/// Both are immutable once built and can be shared across runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectorPair {
    left: DenseMatrix,
    right: DenseMatrix,
}

impl ProjectorPair {
    /// Wraps explicit projectors after checking `LᵀL = I` and `R Rᵀ = I`.
    pub fn new(left: DenseMatrix, right: DenseMatrix) -> Result<Self, CompressionError> {
        let gl = matmul(&left, &left, true, false)?;
        let gr = matmul(&right, &right, false, true)?;
        let defect = gl
            .max_abs_diff(&DenseMatrix::identity(left.cols()))?
            .max(gr.max_abs_diff(&DenseMatrix::identity(right.rows()))?);
        if defect > ORTHONORMAL_TOL {
            return Err(CompressionError::NotOrthonormal { defect });
        }
        Ok(Self { left, right })
    }

    /// `L ∈ R^{d×q}`.
    pub fn left(&self) -> &DenseMatrix {
        &self.left
    }

    /// `R ∈ R^{q×n}`.
    pub fn right(&self) -> &DenseMatrix {
        &self.right
    }

    /// Data dimensions `(d, n)` the pair projects.
    pub fn data_shape(&self) -> (usize, usize) {
        (self.left.rows(), self.right.cols())
    }

    /// `(q_left, q_right)`; equal for pairs built by [`build_projectors`].
    pub fn widths(&self) -> (usize, usize) {
        (self.left.cols(), self.right.rows())
    }

    /// `X̂ = Lᵀ X`, q×n.
    pub fn compress_left<X: MatrixOperand + ?Sized>(
        &self,
        x: &X,
    ) -> Result<DenseMatrix, CompressionError> {
        Ok(x.product(&self.left, true, false)?.transpose())
    }

    /// `X̌ = X Rᵀ`, d×q.
    pub fn compress_right<X: MatrixOperand + ?Sized>(
        &self,
        x: &X,
    ) -> Result<DenseMatrix, CompressionError> {
        Ok(x.product(&self.right, false, true)?)
    }

    /// `Â = Lᵀ A`, q×k.
    pub fn compress_factor_a(&self, a: &DenseMatrix) -> Result<DenseMatrix, CompressionError> {
        Ok(matmul(&self.left, a, true, false)?)
    }

    /// `B̌ = R B`, q×k.
    pub fn compress_factor_b(&self, b: &DenseMatrix) -> Result<DenseMatrix, CompressionError> {
        Ok(matmul(&self.right, b, false, false)?)
    }
}

/// Builds `L` from the range of `X` and `R` from the range of `Xᵀ` using the
/// two sub-seeds of `cfg`.
pub fn build_projectors<X: MatrixOperand + ?Sized>(
    x: &X,
    cfg: &SketchConfig,
) -> Result<ProjectorPair, CompressionError> {
    let (d, n) = x.shape();
    cfg.validate_for(d, n)?;
    let (seed_left, seed_right) = cfg.sub_seeds();
    let left = range_basis(x, false, cfg.q, cfg.power_iterations, seed_left)?;
    let right = range_basis(x, true, cfg.q, cfg.power_iterations, seed_right)?.transpose();
    Ok(ProjectorPair { left, right })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SparseMatrix;

    fn low_rank(d: usize, n: usize, rank: usize, seed: u64) -> DenseMatrix {
        let u = gaussian_sketch(d, rank, seed);
        let v = gaussian_sketch(n, rank, seed + 1000);
        matmul(&u, &v, false, true).unwrap()
    }

    fn capture_residual(x: &DenseMatrix, l: &DenseMatrix) -> f64 {
        let proj = matmul(l, &matmul(l, x, true, false).unwrap(), false, false).unwrap();
        x.sub(&proj).unwrap().frobenius_norm_sq().sqrt() / x.frobenius_norm_sq().sqrt()
    }

    #[test]
    fn sketch_is_deterministic_and_seed_sensitive() {
        assert_eq!(gaussian_sketch(4, 3, 9), gaussian_sketch(4, 3, 9));
        assert_ne!(gaussian_sketch(4, 3, 9), gaussian_sketch(4, 3, 10));
    }

    #[test]
    fn sketch_moments() {
        let s = gaussian_sketch(10_000, 1, 42);
        let mean = s.as_slice().iter().sum::<f64>() / 10_000.0;
        let var = s.as_slice().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 9_999.0;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var - 1.0).abs() < 0.1, "var {var}");
    }

    #[test]
    fn rank_one_is_captured() {
        let x = low_rank(30, 20, 1, 3);
        for w in 0..3 {
            let q = powered_range_finder(&x, &SketchConfig::new(2, w, 1)).unwrap();
            assert!(capture_residual(&x, &q) <= 1e-8);
        }
    }

    #[test]
    fn rank_five_with_oversampling() {
        let x = low_rank(60, 40, 5, 17);
        let q = powered_range_finder(&x, &SketchConfig::new(8, 2, 5)).unwrap();
        assert!(capture_residual(&x, &q) <= 1e-8);
    }

    #[test]
    fn random_matrix_basis_is_orthonormal() {
        let x = gaussian_sketch(100, 80, 8);
        let q = powered_range_finder(&x, &SketchConfig::new(20, 1, 2)).unwrap();
        let g = matmul(&q, &q, true, false).unwrap();
        assert!(g.max_abs_diff(&DenseMatrix::identity(20)).unwrap() <= 1e-10);
    }

    #[test]
    fn width_validation() {
        let x = DenseMatrix::zeros(5, 4);
        assert!(matches!(
            powered_range_finder(&x, &SketchConfig::new(5, 0, 0)),
            Err(CompressionError::InvalidWidth { q: 5, limit: 4 })
        ));
        assert!(build_projectors(&x, &SketchConfig::new(0, 0, 0)).is_err());
    }

    #[test]
    fn projector_shapes_olivetti_dims() {
        let x = DenseMatrix::from_fn(400, 4096, |i, j| ((i * 31 + j * 17) % 97) as f64 / 97.0);
        let p = build_projectors(&x, &SketchConfig::new(25, 1, 3)).unwrap();
        assert_eq!(p.left().shape(), (400, 25));
        assert_eq!(p.right().shape(), (25, 4096));
    }

    #[test]
    fn compressed_shapes_and_zero_factor() {
        let x = low_rank(50, 30, 4, 1);
        let p = build_projectors(&x, &SketchConfig::new(9, 1, 4)).unwrap();
        assert_eq!(p.compress_left(&x).unwrap().shape(), (9, 30));
        assert_eq!(p.compress_right(&x).unwrap().shape(), (50, 9));
        let zb = p.compress_factor_b(&DenseMatrix::zeros(30, 3)).unwrap();
        assert_eq!(zb, DenseMatrix::zeros(9, 3));
        assert_eq!(p.compress_factor_a(&DenseMatrix::zeros(50, 3)).unwrap().shape(), (9, 3));
    }

    #[test]
    fn left_compression_expands_back_for_low_rank() {
        let x = low_rank(40, 25, 3, 5);
        let p = build_projectors(&x, &SketchConfig::new(6, 0, 11)).unwrap();
        let back = matmul(p.left(), &p.compress_left(&x).unwrap(), false, false).unwrap();
        let err = back.sub(&x).unwrap().frobenius_norm_sq().sqrt();
        assert!(err <= 1e-8 * x.frobenius_norm_sq().sqrt());
    }

    #[test]
    fn sparse_input_matches_dense_input() {
        let x = low_rank(30, 20, 2, 9);
        let mut clipped = x.clone();
        clipped.as_mut_slice().iter_mut().for_each(|v| {
            if *v < 0.5 {
                *v = 0.0
            }
        });
        let s = SparseMatrix::from_dense(&clipped);
        let cfg = SketchConfig::new(5, 2, 7);
        let pd = build_projectors(&clipped, &cfg).unwrap();
        let ps = build_projectors(&s, &cfg).unwrap();
        assert!(pd.left().max_abs_diff(ps.left()).unwrap() < 1e-10);
        assert!(pd.right().max_abs_diff(ps.right()).unwrap() < 1e-10);
    }

    #[test]
    fn explicit_pair_validation() {
        let (l, _) = thin_qr(&gaussian_sketch(6, 3, 1)).unwrap();
        let (r, _) = thin_qr(&gaussian_sketch(5, 2, 2)).unwrap();
        let pair = ProjectorPair::new(l.clone(), r.transpose()).unwrap();
        assert_eq!(pair.widths(), (3, 2));
        assert_eq!(pair.data_shape(), (6, 5));
        assert!(ProjectorPair::new(l.scale(2.0), r.transpose()).is_err());
    }
}
