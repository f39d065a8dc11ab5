//! Factorization algorithms and the outer iteration loop.
//!
//! Six algorithms share one driver ([`run`]): multiplicative updates (MU),
//! HALS and FastHALS, each uncompressed or working on randomly projected
//! data (the `-RP` variants). Every step function updates a [`FactorPair`]
//! in place; compressed steps also keep the projected factors `Â = LᵀA` and
//! `B̌ = RB` current.
//!
//! Sweeps update all columns of `A` (ascending `j`) and then all columns of
//! `B`, so HALS and FastHALS visit identical block sequences.

mod constraints;
mod fasthals;
mod hals;
mod init;
mod mu;
mod projected;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compression::{build_projectors, CompressionError, ProjectorPair, SketchConfig};
use crate::linalg::{FactorPair, LinalgError, MatrixOperand};
use crate::metrics::{estimate_cost, gini, reconstruction_error, RunTrace, TraceRecord};

pub use constraints::{
    fasthals_b_update, fasthals_b_update_unconstrained, hals_b_update,
    hals_b_update_unconstrained, Penalty,
};
pub use fasthals::{fasthals_rp_step, fasthals_step};
pub use hals::{hals_rp_step, hals_step};
pub use init::{initialize, reinit_rng, SolverRng, REINIT_SCALE};
pub use mu::{mu_rp_step, mu_step, MU_EPSILON};
pub use projected::{CompressedData, ProjectedFactors};

/// Denominators below this mark a dead component.
pub const DEAD_COMPONENT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "mu")]
    Mu,
    #[serde(rename = "mu-rp")]
    MuRp,
    #[serde(rename = "hals")]
    Hals,
    #[serde(rename = "hals-rp")]
    HalsRp,
    #[serde(rename = "fasthals")]
    FastHals,
    #[serde(rename = "fasthals-rp")]
    FastHalsRp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [
        Algorithm::Mu,
        Algorithm::MuRp,
        Algorithm::Hals,
        Algorithm::HalsRp,
        Algorithm::FastHals,
        Algorithm::FastHalsRp,
    ];

    /// True for the random-projection variants.
    pub fn is_compressed(self) -> bool {
        matches!(self, Algorithm::MuRp | Algorithm::HalsRp | Algorithm::FastHalsRp)
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mu => "mu",
            Algorithm::MuRp => "mu-rp",
            Algorithm::Hals => "hals",
            Algorithm::HalsRp => "hals-rp",
            Algorithm::FastHals => "fasthals",
            Algorithm::FastHalsRp => "fasthals-rp",
        }
    }

    fn is_multiplicative(self) -> bool {
        matches!(self, Algorithm::Mu | Algorithm::MuRp)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = SolverError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == norm)
            .ok_or_else(|| SolverError::InvalidConfig(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("input matrix has a negative entry ({0}); NMF needs non-negative data")]
    NegativeInput(f64),
    #[error("non-finite reconstruction error at iteration {iteration}")]
    NonFinite {
        iteration: usize,
        trace: Box<RunTrace>,
    },
    #[error(transparent)]
    Compression(#[from] CompressionError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Full description of one solver run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub k: usize,
    /// Required for the compressed variants, ignored otherwise.
    pub sketch: Option<SketchConfig>,
    /// L1 weight on B (HALS family only).
    pub alpha: f64,
    /// Squared-L2 weight on B (HALS family only).
    pub beta: f64,
    pub max_iterations: usize,
    pub rel_tolerance: f64,
    pub error_interval: usize,
    pub seed: u64,
    /// Normalize columns of A to unit length (FastHALS variants only).
    pub normalize_a: bool,
}

impl SolverConfig {
    /// Defaults: 200 iterations, error every 5, relative tolerance 1e-10,
    /// seed 1, no penalties, normalization on. Compressed algorithms take a
    /// default sketch of `q = k + 5`, `w = 2`; override with [`Self::with_sketch`].
    pub fn new(algorithm: Algorithm, k: usize) -> Self {
        Self {
            algorithm,
            k,
            sketch: algorithm
                .is_compressed()
                .then(|| SketchConfig::new(k + 5, 2, 1)),
            alpha: 0.0,
            beta: 0.0,
            max_iterations: 200,
            rel_tolerance: 1e-10,
            error_interval: 5,
            seed: 1,
            normalize_a: true,
        }
    }

    pub fn with_sketch(mut self, q: usize, power_iterations: usize) -> Self {
        let seed = self.sketch.map_or(self.seed, |s| s.seed);
        self.sketch = Some(SketchConfig::new(q, power_iterations, seed));
        self
    }

    /// Sets the run seed; the sketch seed follows it.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        if let Some(s) = self.sketch.as_mut() {
            s.seed = seed;
        }
        self
    }

    pub fn with_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn with_penalty(mut self, alpha: f64, beta: f64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    pub fn with_normalization(mut self, normalize_a: bool) -> Self {
        self.normalize_a = normalize_a;
        self
    }

    pub fn with_tolerance(mut self, rel_tolerance: f64) -> Self {
        self.rel_tolerance = rel_tolerance;
        self
    }

    pub fn with_error_interval(mut self, error_interval: usize) -> Self {
        self.error_interval = error_interval;
        self
    }

    pub fn penalty(&self) -> Penalty {
        Penalty {
            alpha: self.alpha,
            beta: self.beta,
        }
    }

    /// Sketch width used by compressed variants.
    pub fn q(&self) -> Option<usize> {
        if self.algorithm.is_compressed() {
            self.sketch.map(|s| s.q)
        } else {
            None
        }
    }

    /// Checks the configuration against data of shape d×n.
    pub fn validate(&self, d: usize, n: usize) -> Result<(), SolverError> {
        let bad = |m: String| Err(SolverError::InvalidConfig(m));
        if self.k == 0 {
            return bad("k must be at least 1".into());
        }
        if self.k > d.min(n) {
            return bad(format!("k = {} exceeds min(d, n) = {}", self.k, d.min(n)));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0 && self.beta.is_finite() && self.beta >= 0.0)
        {
            return bad(format!(
                "alpha and beta must be finite and non-negative (alpha={}, beta={})",
                self.alpha, self.beta
            ));
        }
        if self.algorithm.is_multiplicative() && (self.alpha != 0.0 || self.beta != 0.0) {
            return bad(format!(
                "{} does not support sparsity/smoothness penalties",
                self.algorithm
            ));
        }
        if !(self.rel_tolerance > 0.0) {
            return bad("rel_tolerance must be positive".into());
        }
        if self.error_interval == 0 {
            return bad("error_interval must be at least 1".into());
        }
        if self.algorithm.is_compressed() {
            let Some(sketch) = self.sketch else {
                return bad(format!("{} needs a sketch configuration", self.algorithm));
            };
            sketch.validate_for(d, n)?;
            if self.k >= sketch.q {
                return bad(format!(
                    "compressed algorithms need k < q (k = {}, q = {})",
                    self.k, sketch.q
                ));
            }
        }
        Ok(())
    }
}

/// Mutable solver state shared by the step functions.
#[derive(Debug, Clone)]
pub struct IterationState {
    pub factors: FactorPair,
    /// `Â` and `B̌`, present for compressed algorithms.
    pub projected: Option<ProjectedFactors>,
    pub iteration: usize,
    pub last_error: f64,
}

/// Runs `config` on `x`, building projectors first for compressed variants.
pub fn run<X: MatrixOperand + ?Sized>(
    x: &X,
    config: &SolverConfig,
) -> Result<(FactorPair, RunTrace), SolverError> {
    let (d, n) = x.shape();
    config.validate(d, n)?;
    check_nonnegative(x)?;
    if config.algorithm.is_compressed() {
        let start = Instant::now();
        let sketch = config.sketch.expect("validated");
        let projectors = build_projectors(x, &sketch)?;
        let setup = start.elapsed().as_secs_f64();
        drive(x, config, Some(&projectors), setup)
    } else {
        drive(x, config, None, 0.0)
    }
}

/// Like [`run`] but with caller-supplied projectors (ignored for
/// uncompressed algorithms). The projectors may have different left and
/// right widths; `config.sketch` is then only used for validation of `k`.
pub fn run_with_projectors<X: MatrixOperand + ?Sized>(
    x: &X,
    config: &SolverConfig,
    projectors: &ProjectorPair,
) -> Result<(FactorPair, RunTrace), SolverError> {
    let (d, n) = x.shape();
    if projectors.data_shape() != (d, n) {
        return Err(SolverError::InvalidConfig(format!(
            "projectors built for {:?}, data is {d}x{n}",
            projectors.data_shape()
        )));
    }
    check_nonnegative(x)?;
    let mut cfg = config.clone();
    if cfg.algorithm.is_compressed() {
        // a pair with ql <= d and qr <= n always has min(ql, qr) <= min(d, n)
        let (ql, qr) = projectors.widths();
        let w = cfg.sketch.map_or(0, |s| s.power_iterations);
        cfg.sketch = Some(SketchConfig::new(ql.min(qr), w, cfg.seed));
    }
    cfg.validate(d, n)?;
    drive(x, &cfg, Some(projectors), 0.0)
}

fn check_nonnegative<X: MatrixOperand + ?Sized>(x: &X) -> Result<(), SolverError> {
    let min = x.min_entry();
    if min < 0.0 {
        return Err(SolverError::NegativeInput(min));
    }
    Ok(())
}

fn drive<X: MatrixOperand + ?Sized>(
    x: &X,
    config: &SolverConfig,
    projectors: Option<&ProjectorPair>,
    setup_seconds: f64,
) -> Result<(FactorPair, RunTrace), SolverError> {
    let (d, n) = x.shape();
    let algorithm = config.algorithm;
    let mut rng = reinit_rng(config.seed);
    let factors = initialize(d, n, config.k, config.seed);

    let compressed = match (algorithm.is_compressed(), projectors) {
        (true, Some(p)) => Some(CompressedData::new(x, p)?),
        (true, None) => unreachable!("compressed runs always carry projectors"),
        (false, _) => None,
    };
    let projected = compressed
        .as_ref()
        .map(|c| ProjectedFactors::compute(c.projectors(), &factors))
        .transpose()?;

    let initial_error = reconstruction_error(x, &factors);
    let mut state = IterationState {
        factors,
        projected,
        iteration: 0,
        last_error: initial_error,
    };
    let estimate = estimate_cost(algorithm, d, n, config.k, config.q())
        .map_err(|e| SolverError::InvalidConfig(e.to_string()))?;

    let mut trace = RunTrace {
        config: config.clone(),
        records: vec![TraceRecord {
            iteration: 0,
            error: initial_error,
            elapsed_seconds: 0.0,
        }],
        update_seconds: Vec::with_capacity(config.max_iterations),
        setup_seconds,
        iterations_run: 0,
        converged: false,
        gini_b: None,
        estimate,
    };
    if !initial_error.is_finite() {
        return Err(SolverError::NonFinite {
            iteration: 0,
            trace: Box::new(trace),
        });
    }

    let penalty = config.penalty();
    let mut elapsed = 0.0;
    let mut last_recorded = initial_error;
    for it in 1..=config.max_iterations {
        let start = Instant::now();
        match (&compressed, state.projected.as_mut()) {
            (Some(c), Some(pf)) => match algorithm {
                Algorithm::MuRp => mu_rp_step(c, &mut state.factors, pf)?,
                Algorithm::HalsRp => {
                    hals_rp_step(c, &mut state.factors, pf, penalty, &mut rng)?
                }
                Algorithm::FastHalsRp => fasthals_rp_step(
                    c,
                    &mut state.factors,
                    pf,
                    config.normalize_a,
                    penalty,
                    &mut rng,
                )?,
                _ => unreachable!("uncompressed algorithm with projected data"),
            },
            _ => match algorithm {
                Algorithm::Mu => mu_step(x, &mut state.factors)?,
                Algorithm::Hals => hals_step(x, &mut state.factors, penalty, &mut rng)?,
                Algorithm::FastHals => fasthals_step(
                    x,
                    &mut state.factors,
                    config.normalize_a,
                    penalty,
                    &mut rng,
                )?,
                _ => unreachable!("compressed algorithm without projected data"),
            },
        }
        let dt = start.elapsed().as_secs_f64();
        elapsed += dt;
        trace.update_seconds.push(dt);
        state.iteration = it;
        trace.iterations_run = it;

        if it % config.error_interval == 0 || it == config.max_iterations {
            let error = reconstruction_error(x, &state.factors);
            trace.records.push(TraceRecord {
                iteration: it,
                error,
                elapsed_seconds: elapsed,
            });
            state.last_error = error;
            if !error.is_finite() {
                return Err(SolverError::NonFinite {
                    iteration: it,
                    trace: Box::new(trace),
                });
            }
            let decrease = if last_recorded > 0.0 {
                (last_recorded - error).abs() / last_recorded
            } else {
                0.0
            };
            last_recorded = error;
            if decrease < config.rel_tolerance {
                trace.converged = true;
                break;
            }
        }
    }

    trace.gini_b = gini(&state.factors.b).ok();
    Ok((state.factors, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(a.name().parse::<Algorithm>().unwrap(), a);
        }
        assert_eq!("FASTHALS_RP".parse::<Algorithm>().unwrap(), Algorithm::FastHalsRp);
        assert!("als".parse::<Algorithm>().is_err());
    }

    #[test]
    fn config_validation() {
        let ok = SolverConfig::new(Algorithm::FastHalsRp, 3).with_sketch(6, 1);
        assert!(ok.validate(20, 10).is_ok());
        assert!(SolverConfig::new(Algorithm::FastHalsRp, 6).with_sketch(6, 1).validate(20, 10).is_err());
        assert!(SolverConfig::new(Algorithm::Hals, 0).validate(5, 5).is_err());
        assert!(SolverConfig::new(Algorithm::Hals, 2).with_penalty(-1.0, 0.0).validate(5, 5).is_err());
        assert!(SolverConfig::new(Algorithm::Mu, 2).with_penalty(0.1, 0.0).validate(5, 5).is_err());
        assert!(SolverConfig::new(Algorithm::HalsRp, 2).with_sketch(30, 0).validate(20, 10).is_err());
        let mut no_sketch = SolverConfig::new(Algorithm::MuRp, 2);
        no_sketch.sketch = None;
        assert!(no_sketch.validate(20, 10).is_err());
    }

    #[test]
    fn zero_iterations_returns_initial_state() {
        let x = DenseMatrix::from_fn(6, 5, |i, j| (i + j) as f64);
        let cfg = SolverConfig::new(Algorithm::Hals, 2).with_iterations(0);
        let (f, trace) = run(&x, &cfg).unwrap();
        assert_eq!(f, initialize(6, 5, 2, cfg.seed));
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.records[0].iteration, 0);
        assert_eq!(trace.iterations_run, 0);
    }

    #[test]
    fn negative_input_rejected() {
        let x = DenseMatrix::from_rows(&[[1.0, -0.5], [0.0, 2.0]]);
        let cfg = SolverConfig::new(Algorithm::Mu, 1);
        assert!(matches!(run(&x, &cfg), Err(SolverError::NegativeInput(_))));
    }

    #[test]
    fn record_cadence() {
        let x = DenseMatrix::from_fn(12, 9, |i, j| ((i * 7 + j * 3) % 5) as f64 + 0.1);
        let cfg = SolverConfig::new(Algorithm::Mu, 2)
            .with_iterations(23)
            .with_tolerance(1e-300);
        let (_, trace) = run(&x, &cfg).unwrap();
        let its: Vec<usize> = trace.records.iter().map(|r| r.iteration).collect();
        assert_eq!(its, vec![0, 5, 10, 15, 20, 23]);
        assert_eq!(trace.update_seconds.len(), 23);
        assert!(trace.records.windows(2).all(|w| w[0].elapsed_seconds <= w[1].elapsed_seconds));
    }

    #[test]
    fn runs_are_deterministic() {
        let x = DenseMatrix::from_fn(15, 12, |i, j| ((i * 5 + j * 11) % 7) as f64);
        for algo in Algorithm::ALL {
            let cfg = SolverConfig::new(algo, 2).with_sketch(6, 1).with_iterations(20);
            let (f1, t1) = run(&x, &cfg).unwrap();
            let (f2, t2) = run(&x, &cfg).unwrap();
            assert_eq!(f1, f2, "{algo}");
            let e1: Vec<f64> = t1.records.iter().map(|r| r.error).collect();
            let e2: Vec<f64> = t2.records.iter().map(|r| r.error).collect();
            assert_eq!(e1, e2, "{algo}");
        }
    }
}
