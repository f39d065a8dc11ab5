//! Dataset loading, synthetic generators and matrix persistence.

mod corpus;
mod csv;
mod mtx;
mod pgm;
mod synthetic;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{DenseMatrix, LinalgError, MatrixOperand, SparseMatrix};

pub use self::corpus::{build_term_frequency, load_corpus, CorpusLayout, TermFrequency};
pub use self::csv::{load_dense_csv, read_dense_csv, save_dense_csv};
pub use self::mtx::{load_matrix_market, read_matrix_market, save_matrix_market};
pub use self::pgm::{load_pgm, load_pgm_directory};
pub use self::synthetic::{
    generate_synthetic, nonnegative_low_rank, synthetic_components, SyntheticComponents,
    SyntheticSpec,
};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", .path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: negative value {value} at row {row}, column {col}", .path.display())]
    NegativeValue {
        path: PathBuf,
        row: usize,
        col: usize,
        value: f64,
    },
    #[error("inconsistent dimensions: {0}")]
    InconsistentDims(String),
    #[error("{}: no input files found", .0.display())]
    EmptyDirectory(PathBuf),
    #[error("corpus has no usable documents")]
    NoDocuments,
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

impl DataError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        DataError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn parse(path: &Path, line: usize, message: impl Into<String>) -> Self {
        DataError::Parse {
            path: path.to_path_buf(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, DataError>;

/// Where a data matrix comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DatasetDescriptor {
    DenseCsv { path: PathBuf, has_header: bool },
    PgmDirectory { path: PathBuf },
    MatrixMarket { path: PathBuf },
    Corpus {
        path: PathBuf,
        layout: CorpusLayout,
        vocab_size: usize,
        max_docs: usize,
    },
    Synthetic(SyntheticSpec),
    LowRank {
        d: usize,
        n: usize,
        rank: usize,
        noise: f64,
        seed: u64,
    },
}

/// A loaded data matrix, dense or sparse.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    Dense(DenseMatrix),
    Sparse(SparseMatrix),
}

impl Dataset {
    pub fn operand(&self) -> &dyn MatrixOperand {
        match self {
            Dataset::Dense(m) => m,
            Dataset::Sparse(m) => m,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.operand().shape()
    }
}

impl DatasetDescriptor {
    pub fn name(&self) -> String {
        let file = |p: &Path| p.file_name().map_or_else(String::new, |f| f.to_string_lossy().into_owned());
        match self {
            DatasetDescriptor::DenseCsv { path, .. }
            | DatasetDescriptor::PgmDirectory { path }
            | DatasetDescriptor::MatrixMarket { path }
            | DatasetDescriptor::Corpus { path, .. } => file(path),
            DatasetDescriptor::Synthetic(s) => format!("synthetic-{}x{}-r{}", s.d, s.n, s.true_rank),
            DatasetDescriptor::LowRank { d, n, rank, .. } => format!("lowrank-{d}x{n}-r{rank}"),
        }
    }

    pub fn load(&self) -> Result<Dataset> {
        Ok(match self {
            DatasetDescriptor::DenseCsv { path, has_header } => {
                Dataset::Dense(load_dense_csv(path, *has_header)?)
            }
            DatasetDescriptor::PgmDirectory { path } => Dataset::Dense(load_pgm_directory(path)?),
            DatasetDescriptor::MatrixMarket { path } => Dataset::Sparse(load_matrix_market(path)?),
            DatasetDescriptor::Corpus {
                path,
                layout,
                vocab_size,
                max_docs,
            } => {
                let docs = load_corpus(path, *layout)?;
                Dataset::Sparse(build_term_frequency(&docs, *vocab_size, *max_docs)?.matrix)
            }
            DatasetDescriptor::Synthetic(spec) => Dataset::Dense(generate_synthetic(spec)?),
            DatasetDescriptor::LowRank {
                d,
                n,
                rank,
                noise,
                seed,
            } => Dataset::Dense(nonnegative_low_rank(*d, *n, *rank, *noise, *seed)?),
        })
    }
}
