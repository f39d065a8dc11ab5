//! Non-negative matrix factorization `X ≈ A Bᵀ` with optional compression
//! of the data by randomized range finding.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`] holds dense and CSR matrices, products and a Householder QR.
//! * [`compression`] builds the orthonormal projectors `L` and `R` and
//!   applies them to data and factors.
//! * [`solvers`] implements MU, HALS and FastHALS, plain and on projected
//!   data, with optional L1/L2 penalties on `B`.
//! * [`metrics`] has the reconstruction error, the Gini sparsity index,
//!   the cost model and projection distortion.
//! * [`data`] loads CSV, PGM, Matrix Market and text corpora, and generates
//!   synthetic data.
//! * [`harness`] drives experiments for the `rpnmf` binary.
//!
//! ```
//! use rpnmf::data::nonnegative_low_rank;
//! use rpnmf::solvers::{run, Algorithm, SolverConfig};
//!
//! let x = nonnegative_low_rank(30, 20, 3, 0.0, 7).unwrap();
//! let cfg = SolverConfig::new(Algorithm::FastHalsRp, 3).with_sketch(8, 2);
//! let (factors, trace) = run(&x, &cfg).unwrap();
//! assert_eq!(factors.a.shape(), (30, 3));
//! assert!(trace.final_error() < trace.initial_error());
//! ```

pub mod compression;
pub mod data;
pub mod harness;
pub mod linalg;
pub mod metrics;
pub mod solvers;

pub use compression::{build_projectors, ProjectorPair, SketchConfig};
pub use linalg::{DenseMatrix, FactorPair, MatrixOperand, SparseMatrix};
pub use metrics::{RunTrace, TraceRecord};
pub use solvers::{run, run_with_projectors, Algorithm, SolverConfig, SolverError};
