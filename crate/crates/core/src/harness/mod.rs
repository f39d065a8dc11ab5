//! Experiment plans and the command implementations behind the `rpnmf`
//! binary.
//!
//! A plan is assembled from [`PlanSettings`]: values read from a plain
//! `key = value` file, overridden by command-line flags, with defaults for
//! anything left unset.

mod commands;
mod output;

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compression::CompressionError;
use crate::data::{CorpusLayout, DataError, DatasetDescriptor, SyntheticSpec};
use crate::metrics::MetricsError;
use crate::solvers::{Algorithm, SolverConfig, SolverError};

pub use commands::{compare, estimate, factorize, project, sweep, CommandOutcome};
pub use output::{
    read_csv_rows, write_atomic, DistortionFile, RunRow, RunStatus, Summary, SweepCell, TableRow,
    TraceRow,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("input not found: {}", .0.display())]
    InputMissing(PathBuf),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Compression(#[from] CompressionError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] ::csv::Error),
    #[error("json output: {0}")]
    Json(#[from] serde_json::Error),
    #[error("thread pool: {0}")]
    ThreadPool(#[from] rayon::ThreadPoolBuildError),
}

impl HarnessError {
    /// 2 for bad input or configuration, 1 for failures during a run.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::InputMissing(_) | HarnessError::Data(_) => 2,
            HarnessError::Solver(SolverError::InvalidConfig(_) | SolverError::NegativeInput(_)) => 2,
            HarnessError::Metrics(MetricsError::InvalidDims(_)) => 2,
            _ => 1,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InputFormat {
    Csv,
    Mm,
    PgmDir,
    Corpus,
    Synthetic,
}

impl FromStr for InputFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim().to_ascii_lowercase().as_str() {
            "csv" => InputFormat::Csv,
            "mm" | "mtx" => InputFormat::Mm,
            "pgm-dir" | "pgm" => InputFormat::PgmDir,
            "corpus" => InputFormat::Corpus,
            "synthetic" => InputFormat::Synthetic,
            other => return Err(HarnessError::Config(format!("unknown input format '{other}'"))),
        })
    }
}

/// Format of the compressed matrices written by [`project`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixFormat {
    #[default]
    Csv,
    Mm,
}

impl FromStr for MatrixFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(MatrixFormat::Csv),
            "mm" | "mtx" => Ok(MatrixFormat::Mm),
            other => Err(HarnessError::Config(format!("unknown output format '{other}'"))),
        }
    }
}

/// Partially specified plan. `None` means "not given here".
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PlanSettings {
    pub algorithms: Option<Vec<Algorithm>>,
    pub k: Option<Vec<usize>>,
    pub q: Option<Vec<usize>>,
    pub w: Option<Vec<usize>>,
    pub alpha: Option<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
    pub seeds: Option<Vec<u64>>,
    pub iters: Option<usize>,
    pub tol: Option<f64>,
    pub error_interval: Option<usize>,
    pub input: Option<String>,
    pub format: Option<InputFormat>,
    pub header: Option<bool>,
    pub corpus_layout: Option<CorpusLayout>,
    pub vocab_size: Option<usize>,
    pub max_docs: Option<usize>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
    pub normalize: Option<bool>,
    pub sample_pairs: Option<usize>,
    pub output_format: Option<MatrixFormat>,
}

fn list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| HarnessError::Config(format!("{key}: cannot parse '{s}'")))
        })
        .collect()
}

fn one<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("{key}: cannot parse '{value}'")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(HarnessError::Config(format!("{key}: expected a boolean, got '{value}'"))),
    }
}

impl PlanSettings {
    /// Parses `key = value` lines. Keys match the long flag names (`_` and
    /// `-` are interchangeable); `#` starts a comment; list values are
    /// comma-separated.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut s = PlanSettings::default();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(HarnessError::Config(format!(
                    "line {}: expected key = value",
                    no + 1
                )));
            };
            let key = key.trim().to_ascii_lowercase().replace('_', "-");
            let v = value.trim();
            match key.as_str() {
                "algo" | "algorithms" => s.algorithms = Some(list(&key, v)?),
                "k" => s.k = Some(list(&key, v)?),
                "q" => s.q = Some(list(&key, v)?),
                "w" => s.w = Some(list(&key, v)?),
                "alpha" => s.alpha = Some(list(&key, v)?),
                "beta" => s.beta = Some(list(&key, v)?),
                "seed" | "seeds" => s.seeds = Some(list(&key, v)?),
                "iters" => s.iters = Some(one(&key, v)?),
                "tol" => s.tol = Some(one(&key, v)?),
                "error-interval" => s.error_interval = Some(one(&key, v)?),
                "input" => s.input = Some(v.to_string()),
                "format" => s.format = Some(v.parse()?),
                "header" => s.header = Some(flag(&key, v)?),
                "corpus-layout" => s.corpus_layout = Some(parse_corpus_layout(v)?),
                "vocab-size" => s.vocab_size = Some(one(&key, v)?),
                "max-docs" => s.max_docs = Some(one(&key, v)?),
                "out" => s.out = Some(PathBuf::from(v)),
                "jobs" => s.jobs = Some(one(&key, v)?),
                "normalize" => s.normalize = Some(flag(&key, v)?),
                "no-normalize" => s.normalize = Some(!flag(&key, v)?),
                "sample-pairs" => s.sample_pairs = Some(one(&key, v)?),
                "output-format" => s.output_format = Some(v.parse()?),
                _ => {
                    return Err(HarnessError::Config(format!(
                        "line {}: unknown key '{key}'",
                        no + 1
                    )))
                }
            }
        }
        Ok(s)
    }

    pub fn from_config_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => HarnessError::InputMissing(path.to_path_buf()),
            _ => HarnessError::io(path, e),
        })?;
        Self::parse_config(&text)
    }

    /// Field-wise merge; values in `overrides` win.
    pub fn merged(self, overrides: PlanSettings) -> PlanSettings {
        macro_rules! pick {
            ($($f:ident),*) => { PlanSettings { $($f: overrides.$f.or(self.$f)),* } };
        }
        pick!(
            algorithms, k, q, w, alpha, beta, seeds, iters, tol, error_interval, input, format,
            header, corpus_layout, vocab_size, max_docs, out, jobs, normalize, sample_pairs,
            output_format
        )
    }

    /// Fills defaults and validates. `default_algorithms` applies when no
    /// algorithm was given.
    pub fn into_plan(self, default_algorithms: &[Algorithm]) -> Result<ExperimentPlan> {
        let input = self
            .input
            .ok_or_else(|| HarnessError::Config("--input is required".into()))?;
        let format = match self.format {
            Some(f) => f,
            None => infer_format(&input)?,
        };
        let dataset = match format {
            InputFormat::Csv => DatasetDescriptor::DenseCsv {
                path: input.into(),
                has_header: self.header.unwrap_or(false),
            },
            InputFormat::Mm => DatasetDescriptor::MatrixMarket { path: input.into() },
            InputFormat::PgmDir => DatasetDescriptor::PgmDirectory { path: input.into() },
            InputFormat::Corpus => DatasetDescriptor::Corpus {
                path: input.into(),
                layout: self.corpus_layout.unwrap_or(CorpusLayout::LinePerDocument),
                vocab_size: self.vocab_size.unwrap_or(1000),
                max_docs: self.max_docs.unwrap_or(5000),
            },
            InputFormat::Synthetic => parse_synthetic(&input)?,
        };
        let nonempty = |name: &str, empty: bool| {
            if empty {
                Err(HarnessError::Config(format!("{name} list is empty")))
            } else {
                Ok(())
            }
        };
        let algorithms = self.algorithms.unwrap_or_else(|| default_algorithms.to_vec());
        let seeds = self.seeds.unwrap_or_else(|| (1..=5).collect());
        nonempty("algorithm", algorithms.is_empty())?;
        nonempty("seed", seeds.is_empty())?;
        let or = |v: Option<Vec<f64>>| v.filter(|v| !v.is_empty()).unwrap_or_else(|| vec![0.0]);
        let plan = ExperimentPlan {
            dataset,
            algorithms,
            k: self.k.filter(|v| !v.is_empty()).unwrap_or_else(|| vec![10]),
            q: self.q.unwrap_or_default(),
            w: self.w.filter(|v| !v.is_empty()).unwrap_or_else(|| vec![2]),
            alpha: or(self.alpha),
            beta: or(self.beta),
            seeds,
            max_iterations: self.iters.unwrap_or(200),
            rel_tolerance: self.tol.unwrap_or(1e-10),
            error_interval: self.error_interval.unwrap_or(5),
            normalize_a: self.normalize.unwrap_or(true),
            jobs: self.jobs.unwrap_or(1).max(1),
            out: self.out.unwrap_or_else(|| PathBuf::from("rpnmf-out")),
            sample_pairs: self.sample_pairs.unwrap_or(2000),
            output_format: self.output_format.unwrap_or_default(),
        };
        if !(plan.rel_tolerance > 0.0) {
            return Err(HarnessError::Config("tol must be positive".into()));
        }
        if plan.error_interval == 0 {
            return Err(HarnessError::Config("error-interval must be at least 1".into()));
        }
        Ok(plan)
    }
}

pub fn parse_corpus_layout(v: &str) -> Result<CorpusLayout> {
    match v.trim().to_ascii_lowercase().as_str() {
        "lines" | "line" => Ok(CorpusLayout::LinePerDocument),
        "files" | "file" => Ok(CorpusLayout::FilePerDocument),
        other => Err(HarnessError::Config(format!(
            "corpus-layout must be 'lines' or 'files', got '{other}'"
        ))),
    }
}

fn infer_format(input: &str) -> Result<InputFormat> {
    let path = Path::new(input);
    if path.is_dir() {
        return Ok(InputFormat::PgmDir);
    }
    match path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase).as_deref() {
        Some("csv") => Ok(InputFormat::Csv),
        Some("mtx") | Some("mm") => Ok(InputFormat::Mm),
        Some("txt") => Ok(InputFormat::Corpus),
        _ if input.contains('=') => Ok(InputFormat::Synthetic),
        _ => Err(HarnessError::Config(format!(
            "cannot infer the format of '{input}', pass --format"
        ))),
    }
}

/// Parses `d=..,n=..,rank=..[,decay=..][,noise=..][,seed=..][,kind=spectrum|lowrank]`.
///
/// `spectrum` (default) prescribes singular values `j^(−decay)`;
/// `lowrank` multiplies uniform non-negative factors.
pub fn parse_synthetic(spec: &str) -> Result<DatasetDescriptor> {
    let (mut d, mut n, mut rank) = (None, None, None);
    let (mut decay, mut noise, mut seed) = (0.0, 0.0, 1u64);
    let mut kind = "spectrum".to_string();
    for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| HarnessError::Config(format!("synthetic spec: '{part}' is not key=value")))?;
        let key = key.trim().to_ascii_lowercase();
        match key.as_str() {
            "d" => d = Some(one(&key, value)?),
            "n" => n = Some(one(&key, value)?),
            "rank" | "r" => rank = Some(one(&key, value)?),
            "decay" | "p" => decay = one(&key, value)?,
            "noise" => noise = one(&key, value)?,
            "seed" => seed = one(&key, value)?,
            "kind" => kind = value.trim().to_ascii_lowercase(),
            _ => return Err(HarnessError::Config(format!("synthetic spec: unknown key '{key}'"))),
        }
    }
    let missing = |k: &str| HarnessError::Config(format!("synthetic spec needs {k}="));
    let (d, n, rank) = (
        d.ok_or_else(|| missing("d"))?,
        n.ok_or_else(|| missing("n"))?,
        rank.ok_or_else(|| missing("rank"))?,
    );
    match kind.as_str() {
        "spectrum" => {
            let s = SyntheticSpec {
                d,
                n,
                true_rank: rank,
                decay,
                noise_level: noise,
                seed,
            };
            s.validate()?;
            Ok(DatasetDescriptor::Synthetic(s))
        }
        "lowrank" | "factors" => Ok(DatasetDescriptor::LowRank {
            d,
            n,
            rank,
            noise,
            seed,
        }),
        other => Err(HarnessError::Config(format!("synthetic kind '{other}' is not spectrum or lowrank"))),
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub dataset: DatasetDescriptor,
    pub algorithms: Vec<Algorithm>,
    pub k: Vec<usize>,
    /// Sketch widths; empty means `k + 5` for each `k`.
    pub q: Vec<usize>,
    pub w: Vec<usize>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub seeds: Vec<u64>,
    pub max_iterations: usize,
    pub rel_tolerance: f64,
    pub error_interval: usize,
    pub normalize_a: bool,
    pub jobs: usize,
    pub out: PathBuf,
    /// Point pairs sampled by the distortion report of [`project`].
    pub sample_pairs: usize,
    pub output_format: MatrixFormat,
}

/// One grid cell: every solver parameter except the seed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellParams {
    pub algorithm: Algorithm,
    pub k: usize,
    /// Only set for compressed algorithms.
    pub q: Option<usize>,
    pub w: Option<usize>,
    pub alpha: f64,
    pub beta: f64,
}

impl fmt::Display for CellParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} k={}", self.algorithm, self.k)?;
        if let (Some(q), Some(w)) = (self.q, self.w) {
            write!(f, " q={q} w={w}")?;
        }
        write!(f, " alpha={} beta={}", self.alpha, self.beta)
    }
}

impl ExperimentPlan {
    /// Cartesian product of the grids. Compressed algorithms range over
    /// `q` and `w`; uncompressed ones ignore them.
    pub fn cells(&self) -> Vec<CellParams> {
        let mut out = Vec::new();
        for &algorithm in &self.algorithms {
            for &k in &self.k {
                let sketches: Vec<(Option<usize>, Option<usize>)> = if algorithm.is_compressed() {
                    let qs = if self.q.is_empty() { vec![k + 5] } else { self.q.clone() };
                    qs.iter()
                        .flat_map(|&q| self.w.iter().map(move |&w| (Some(q), Some(w))))
                        .collect()
                } else {
                    vec![(None, None)]
                };
                for (q, w) in sketches {
                    for &alpha in &self.alpha {
                        for &beta in &self.beta {
                            out.push(CellParams {
                                algorithm,
                                k,
                                q,
                                w,
                                alpha,
                                beta,
                            });
                        }
                    }
                }
            }
        }
        out
    }

    /// The first value of every grid, for single-configuration commands.
    pub fn first_cell(&self, algorithm: Algorithm) -> CellParams {
        let k = self.k[0];
        let compressed = algorithm.is_compressed();
        CellParams {
            algorithm,
            k,
            q: compressed.then(|| self.q.first().copied().unwrap_or(k + 5)),
            w: compressed.then(|| self.w[0]),
            alpha: self.alpha[0],
            beta: self.beta[0],
        }
    }

    pub fn solver_config(&self, cell: &CellParams, seed: u64) -> SolverConfig {
        let mut cfg = SolverConfig::new(cell.algorithm, cell.k)
            .with_iterations(self.max_iterations)
            .with_tolerance(self.rel_tolerance)
            .with_error_interval(self.error_interval)
            .with_penalty(cell.alpha, cell.beta)
            .with_normalization(self.normalize_a);
        if let (Some(q), Some(w)) = (cell.q, cell.w) {
            cfg = cfg.with_sketch(q, w);
        }
        cfg.with_seed(seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn settings(text: &str) -> PlanSettings {
        PlanSettings::parse_config(text).unwrap()
    }

    #[test]
    fn config_file_and_flag_override() {
        let file = settings("# base\nalgo = hals, fasthals-rp\nk=10,20\nseeds = 3\niters=50\ninput = d=20,n=10,rank=3\n");
        let flags = PlanSettings {
            k: Some(vec![5]),
            ..Default::default()
        };
        let plan = file.merged(flags).into_plan(&Algorithm::ALL).unwrap();
        assert_eq!(plan.algorithms, vec![Algorithm::Hals, Algorithm::FastHalsRp]);
        assert_eq!(plan.k, vec![5]);
        assert_eq!(plan.seeds, vec![3]);
        assert_eq!(plan.max_iterations, 50);
        assert!(matches!(plan.dataset, DatasetDescriptor::Synthetic(_)));
    }

    #[test]
    fn config_errors_name_the_line() {
        let err = PlanSettings::parse_config("k = 3\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"));
        assert!(PlanSettings::parse_config("k 3").is_err());
        assert!(PlanSettings::parse_config("k = x").is_err());
    }

    #[test]
    fn defaults_and_cells() {
        let plan = settings("input = d=30,n=20,rank=3\nalgo = mu, hals-rp\nw = 1,2\n")
            .into_plan(&[])
            .unwrap();
        assert_eq!(plan.seeds, vec![1, 2, 3, 4, 5]);
        let cells = plan.cells();
        // mu: one cell; hals-rp: q = k + 5 with two w values
        assert_eq!(cells.len(), 3);
        assert_eq!(cells[1].q, Some(15));
        assert_eq!(cells[0].q, None);
    }

    #[test]
    fn grid_cardinality() {
        let plan = settings(
            "input = d=30,n=20,rank=3\nalgo = fasthals-rp\nk=10,20,30,40,50\nw=1,2,3,4,5\nq=55\n",
        )
        .into_plan(&[])
        .unwrap();
        assert_eq!(plan.cells().len(), 25);
    }

    #[test]
    fn synthetic_specs() {
        assert!(matches!(
            parse_synthetic("d=10,n=8,rank=2,kind=lowrank,noise=0.1").unwrap(),
            DatasetDescriptor::LowRank { rank: 2, .. }
        ));
        assert!(parse_synthetic("d=10,n=8").is_err());
        assert!(parse_synthetic("d=10,n=8,rank=20").is_err());
        assert!(parse_synthetic("d=10,n=8,rank=2,kind=other").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(HarnessError::InputMissing("x".into()).exit_code(), 2);
        assert_eq!(HarnessError::Config("x".into()).exit_code(), 2);
        let io = HarnessError::io(Path::new("o"), std::io::Error::other("disk"));
        assert_eq!(io.exit_code(), 1);
    }
}
