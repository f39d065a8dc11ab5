use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{DataError, Result};
use crate::linalg::{matmul, thin_qr, DenseMatrix};

// Generator streams are disjoint from the solver's (0 and 1) so that data
// and initial factors drawn from the same seed are unrelated.
const SPECTRUM_STREAM: u64 = 16;
const NOISE_STREAM: u64 = 17;
const FACTOR_STREAM: u64 = 18;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Data with a prescribed singular spectrum `σ_j = j^(−decay)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub d: usize,
    pub n: usize,
    pub true_rank: usize,
    pub decay: f64,
    pub noise_level: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.n == 0 || self.true_rank == 0 {
            return Err(DataError::InvalidSpec("d, n and true_rank must be positive".into()));
        }
        if self.true_rank > self.d.min(self.n) {
            return Err(DataError::InvalidSpec(format!(
                "true_rank {} exceeds min(d, n) = {}",
                self.true_rank,
                self.d.min(self.n)
            )));
        }
        if !(self.decay >= 0.0 && self.decay.is_finite()) {
            return Err(DataError::InvalidSpec(format!("decay {} must be >= 0", self.decay)));
        }
        if !(self.noise_level >= 0.0 && self.noise_level.is_finite()) {
            return Err(DataError::InvalidSpec(format!(
                "noise_level {} must be >= 0",
                self.noise_level
            )));
        }
        Ok(())
    }
}

/// `U` (d×r) and `V` (n×r) with orthonormal columns and the spectrum `σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticComponents {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

impl SyntheticComponents {
    /// `U diag(σ) Vᵀ`.
    pub fn product(&self) -> DenseMatrix {
        let us = DenseMatrix::from_fn(self.u.rows(), self.u.cols(), |i, j| {
            self.u.get(i, j) * self.sigma[j]
        });
        matmul(&us, &self.v, false, true).expect("conforming factors")
    }
}

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn synthetic_components(spec: &SyntheticSpec) -> Result<SyntheticComponents> {
    spec.validate()?;
    let mut rng = stream(spec.seed, SPECTRUM_STREAM);
    let (u, _) = thin_qr(&gaussian(spec.d, spec.true_rank, &mut rng))?;
    let (v, _) = thin_qr(&gaussian(spec.n, spec.true_rank, &mut rng))?;
    let sigma = (1..=spec.true_rank)
        .map(|j| (j as f64).powf(-spec.decay))
        .collect();
    Ok(SyntheticComponents { u, sigma, v })
}

/// Non-negative data with the spectrum of `spec`.
///
/// Noiseless data is shifted by its minimum so that nothing is clipped;
/// noisy data (`N(0, noise_level²)` added entrywise) is clamped at zero.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<DenseMatrix> {
    let mut x = synthetic_components(spec)?.product();
    if spec.noise_level == 0.0 {
        let min = x.min_value();
        if min < 0.0 {
            x.as_mut_slice().iter_mut().for_each(|v| *v -= min);
        }
    } else {
        let mut rng = stream(spec.seed, NOISE_STREAM);
        for v in x.as_mut_slice() {
            let e: f64 = rng.sample(StandardNormal);
            *v += spec.noise_level * e;
        }
    }
    x.as_mut_slice().iter_mut().for_each(|v| *v = v.max(0.0));
    Ok(x)
}

/// `W Hᵀ` with uniform (0, 1) factors W (d×rank) and H (n×rank), plus
/// optional Gaussian noise of standard deviation `noise`, clamped at zero.
/// Noiseless output has non-negative rank exactly `rank`.
pub fn nonnegative_low_rank(
    d: usize,
    n: usize,
    rank: usize,
    noise: f64,
    seed: u64,
) -> Result<DenseMatrix> {
    if d == 0 || n == 0 || rank == 0 || rank > d.min(n) {
        return Err(DataError::InvalidSpec(format!(
            "need 1 <= rank <= min(d, n), got rank {rank} for {d}x{n}"
        )));
    }
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(DataError::InvalidSpec(format!("noise {noise} must be >= 0")));
    }
    let mut rng = stream(seed, FACTOR_STREAM);
    let w = DenseMatrix::from_fn(d, rank, |_, _| rng.sample(Open01));
    let h = DenseMatrix::from_fn(n, rank, |_, _| rng.sample(Open01));
    let mut x = matmul(&w, &h, false, true)?;
    if noise > 0.0 {
        for v in x.as_mut_slice() {
            let e: f64 = rng.sample(StandardNormal);
            *v = (*v + noise * e).max(0.0);
        }
    }
    Ok(x)
}
