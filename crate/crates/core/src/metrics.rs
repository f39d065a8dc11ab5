//! Quality and cost measurements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compression::{CompressionError, ProjectorPair};
use crate::linalg::{dot, DenseMatrix, FactorPair, MatrixOperand};
use crate::solvers::{Algorithm, SolverConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("Gini coefficient is undefined for an all-zero matrix")]
    AllZero,
    #[error("Gini coefficient needs non-negative entries, found {0}")]
    NegativeEntry(f64),
    #[error("invalid dimensions for cost estimate: {0}")]
    InvalidDims(String),
    #[error("need at least 2 points for distortion statistics, got {0}")]
    TooFewPoints(usize),
    #[error(transparent)]
    Compression(#[from] CompressionError),
}

/// `½ ‖X − A Bᵀ‖²_F`.
///
/// Dense data is evaluated row by row; sparse data goes through
/// [`reconstruction_error_expanded`]. Neither path builds a d×n temporary.
pub fn reconstruction_error<X: MatrixOperand + ?Sized>(x: &X, factors: &FactorPair) -> f64 {
    match x.as_dense() {
        Some(dense) => reconstruction_error_direct(dense, factors),
        None => reconstruction_error_expanded(x, factors),
    }
}

fn reconstruction_error_direct(x: &DenseMatrix, factors: &FactorPair) -> f64 {
    let (a, b) = (&factors.a, &factors.b);
    let mut total = 0.0;
    for i in 0..x.rows() {
        let ai = a.row(i);
        let mut row_sum = 0.0;
        for (j, &xij) in x.row(i).iter().enumerate() {
            let r = xij - dot(ai, b.row(j));
            row_sum += r * r;
        }
        total += row_sum;
    }
    0.5 * total
}

/// `½‖X‖² − tr(Aᵀ X B) + ½ tr((AᵀA)(BᵀB))`, touching only stored entries of
/// `X`. Clamped at zero against cancellation.
pub fn reconstruction_error_expanded<X: MatrixOperand + ?Sized>(
    x: &X,
    factors: &FactorPair,
) -> f64 {
    let (a, b) = (&factors.a, &factors.b);
    let xb = x
        .product(b, false, false)
        .expect("factor shapes conform to the data");
    let cross: f64 = (0..a.rows()).map(|i| dot(a.row(i), xb.row(i))).sum();
    let gram_a = crate::linalg::matmul(a, a, true, false).expect("square gram");
    let gram_b = crate::linalg::matmul(b, b, true, false).expect("square gram");
    let coupling = dot(gram_a.as_slice(), gram_b.as_slice());
    let value = 0.5 * x.frobenius_norm_sq() - cross + 0.5 * coupling;
    value.max(0.0)
}

/// Gini coefficient of all entries of `b`, used as a sparsity index.
///
/// With the entries sorted ascending into `s` (length `m`, 1-based `i`):
/// `G = Σ (2i − m − 1) s_i / (m Σ s_i)`. 0 for a constant matrix, `(m−1)/m`
/// for a single non-zero.
pub fn gini(b: &DenseMatrix) -> Result<f64, MetricsError> {
    gini_of(b.as_slice())
}

pub fn gini_of(values: &[f64]) -> Result<f64, MetricsError> {
    if let Some(&neg) = values.iter().find(|v| **v < 0.0) {
        return Err(MetricsError::NegativeEntry(neg));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let total: f64 = sorted.iter().sum();
    if total <= 0.0 {
        return Err(MetricsError::AllZero);
    }
    let m = sorted.len() as f64;
    let weighted: f64 = sorted
        .iter()
        .enumerate()
        .map(|(i, v)| (2.0 * (i as f64 + 1.0) - m - 1.0) * v)
        .sum();
    Ok(weighted / (m * total))
}

/// Leading-order FLOPs per iteration and resident floats for one algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostEstimate {
    pub algorithm: Algorithm,
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub q: Option<usize>,
    pub flops_per_iteration: u64,
    pub memory_floats: u64,
}

/// Per-algorithm complexity and memory model.
///
/// FLOPs: MU `8dnk`, HALS `8dnk`, FastHALS `4dnk`, MU-RP `4dkq`,
/// HALS-RP `4dnkq`, FastHALS-RP `2dkq`. Memory: `dn + dk + nk` uncompressed,
/// `(2q + k)(d + n)` compressed. `q` must be given exactly for the
/// compressed variants.
pub fn estimate_cost(
    algorithm: Algorithm,
    d: usize,
    n: usize,
    k: usize,
    q: Option<usize>,
) -> Result<CostEstimate, MetricsError> {
    if d == 0 || n == 0 || k == 0 {
        return Err(MetricsError::InvalidDims(format!(
            "d, n, k must be positive (got d={d}, n={n}, k={k})"
        )));
    }
    let (d64, n64, k64) = (d as u64, n as u64, k as u64);
    let (flops, memory) = match (algorithm.is_compressed(), q) {
        (true, Some(0)) | (true, None) => {
            return Err(MetricsError::InvalidDims(format!(
                "{algorithm} needs a positive sketch width q"
            )))
        }
        (false, Some(_)) => {
            return Err(MetricsError::InvalidDims(format!(
                "{algorithm} is uncompressed and takes no sketch width"
            )))
        }
        (true, Some(q)) => {
            let q64 = q as u64;
            let flops = match algorithm {
                Algorithm::MuRp => 4 * d64 * k64 * q64,
                Algorithm::HalsRp => 4 * d64 * n64 * k64 * q64,
                Algorithm::FastHalsRp => 2 * d64 * k64 * q64,
                _ => unreachable!("compressed variants only"),
            };
            (flops, (2 * q64 + k64) * (d64 + n64))
        }
        (false, None) => {
            let flops = match algorithm {
                Algorithm::Mu | Algorithm::Hals => 8 * d64 * n64 * k64,
                Algorithm::FastHals => 4 * d64 * n64 * k64,
                _ => unreachable!("uncompressed variants only"),
            };
            (flops, d64 * n64 + d64 * k64 + n64 * k64)
        }
    };
    Ok(CostEstimate {
        algorithm,
        d,
        n,
        k,
        q,
        flops_per_iteration: flops,
        memory_floats: memory,
    })
}

/// Which projector a distortion check exercises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProjectionSide {
    /// Points are the columns of `X`, mapped by `Lᵀ`.
    Left,
    /// Points are the rows of `X`, mapped by `R`.
    Right,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub side: ProjectionSide,
    pub pairs: usize,
    pub max_relative_distortion: f64,
    pub mean_relative_distortion: f64,
}

/// Relative change of Euclidean distances between point pairs under a
/// projector.
///
/// If `sample_pairs` covers every pair, all pairs are used; otherwise pairs
/// are drawn uniformly with the seeded generator. A pair of coincident
/// points contributes its projected distance as an absolute value.
/// Sparse inputs are densified here; this is a diagnostic, not a solver path.
pub fn pairwise_distortion<X: MatrixOperand + ?Sized>(
    x: &X,
    projectors: &ProjectorPair,
    side: ProjectionSide,
    sample_pairs: usize,
    seed: u64,
) -> Result<DistortionReport, MetricsError> {
    let dense_owned;
    let dense = match x.as_dense() {
        Some(d) => d,
        None => {
            dense_owned = x.to_dense();
            &dense_owned
        }
    };
    // points as rows of these matrices
    let (points, projected) = match side {
        ProjectionSide::Left => (dense.transpose(), projectors.compress_left(dense)?.transpose()),
        ProjectionSide::Right => (dense.clone(), projectors.compress_right(dense)?),
    };
    let m = points.rows();
    if m < 2 {
        return Err(MetricsError::TooFewPoints(m));
    }
    let total_pairs = m * (m - 1) / 2;
    let pairs: Vec<(usize, usize)> = if sample_pairs >= total_pairs {
        (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..sample_pairs)
            .map(|_| {
                let i = rng.random_range(0..m);
                let mut j = rng.random_range(0..m - 1);
                if j >= i {
                    j += 1;
                }
                (i.min(j), i.max(j))
            })
            .collect()
    };
    let distance = |mat: &DenseMatrix, i: usize, j: usize| -> f64 {
        mat.row(i)
            .iter()
            .zip(mat.row(j))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let mut max = 0.0f64;
    let mut sum = 0.0;
    for &(i, j) in &pairs {
        let orig = distance(&points, i, j);
        let proj = distance(&projected, i, j);
        let rel = if orig > 0.0 {
            (proj - orig).abs() / orig
        } else {
            proj
        };
        max = max.max(rel);
        sum += rel;
    }
    Ok(DistortionReport {
        side,
        pairs: pairs.len(),
        max_relative_distortion: max,
        mean_relative_distortion: sum / pairs.len() as f64,
    })
}

/// One error evaluation during a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub error: f64,
    /// Cumulative update time up to this iteration; excludes error evaluations.
    pub elapsed_seconds: f64,
}

/// Everything recorded for one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub config: SolverConfig,
    pub records: Vec<TraceRecord>,
    /// Wall-clock seconds of each iterative update.
    pub update_seconds: Vec<f64>,
    /// Projector construction time (zero for uncompressed algorithms).
    pub setup_seconds: f64,
    pub iterations_run: usize,
    pub converged: bool,
    /// Gini(B) of the final factors; `None` if B ended all-zero.
    pub gini_b: Option<f64>,
    pub estimate: CostEstimate,
}

impl RunTrace {
    pub fn final_error(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.error)
    }

    pub fn initial_error(&self) -> f64 {
        self.records.first().map_or(f64::NAN, |r| r.error)
    }

    /// Median wall-clock seconds per update, `None` before the first update.
    pub fn median_update_seconds(&self) -> Option<f64> {
        median(&self.update_seconds)
    }
}

/// Median of a sample (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Some(if v.len() % 2 == 0 {
        0.5 * (v[mid - 1] + v[mid])
    } else {
        v[mid]
    })
}
