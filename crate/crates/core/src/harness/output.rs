use std::fs::{self, File};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::{HarnessError, Result};
use crate::metrics::{DistortionReport, RunTrace};
use crate::solvers::Algorithm;

/// One error evaluation in long format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub iteration: usize,
    pub error: f64,
    pub elapsed_seconds: f64,
}

impl TraceRow {
    pub fn from_trace(trace: &RunTrace) -> Vec<TraceRow> {
        trace
            .records
            .iter()
            .map(|r| TraceRow {
                algorithm: trace.config.algorithm,
                seed: trace.config.seed,
                iteration: r.iteration,
                error: r.error,
                elapsed_seconds: r.elapsed_seconds,
            })
            .collect()
    }
}

/// Per-run summary written as `summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub algorithm: Algorithm,
    pub k: usize,
    pub q: Option<usize>,
    pub w: Option<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub final_error: f64,
    pub gini_b: Option<f64>,
    pub flops_per_iter: u64,
    pub memory_floats: u64,
    pub iterations_run: usize,
    pub converged: bool,
}

impl Summary {
    pub fn from_trace(trace: &RunTrace) -> Self {
        let cfg = &trace.config;
        let compressed = cfg.algorithm.is_compressed();
        Summary {
            algorithm: cfg.algorithm,
            k: cfg.k,
            q: cfg.q(),
            w: cfg.sketch.filter(|_| compressed).map(|s| s.power_iterations),
            alpha: cfg.alpha,
            beta: cfg.beta,
            final_error: trace.final_error(),
            gini_b: trace.gini_b,
            flops_per_iter: trace.estimate.flops_per_iteration,
            memory_floats: trace.estimate.memory_floats,
            iterations_run: trace.iterations_run,
            converged: trace.converged,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Failed,
}

/// One run of a comparison or sweep; failed runs keep their parameters and
/// the error message.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub k: usize,
    pub q: Option<usize>,
    pub w: Option<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub status: RunStatus,
    pub final_error: Option<f64>,
    pub gini_b: Option<f64>,
    pub iterations_run: Option<usize>,
    pub converged: Option<bool>,
    pub median_seconds_per_update: Option<f64>,
    pub message: String,
}

/// Per-algorithm cost table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub algorithm: Algorithm,
    pub flops_per_iter: u64,
    pub median_seconds_per_update: Option<f64>,
    pub memory_floats: u64,
}

/// Medians over the seeds of one sweep cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub algorithm: Algorithm,
    pub k: usize,
    pub q: Option<usize>,
    pub w: Option<usize>,
    pub alpha: f64,
    pub beta: f64,
    pub runs: usize,
    pub failed: usize,
    pub median_final_error: Option<f64>,
    pub median_gini_b: Option<f64>,
}

/// Distortion of both projectors, written as `distortion.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistortionFile {
    pub left: DistortionReport,
    pub right: DistortionReport,
}

fn tmp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(format!(".tmp{}", std::process::id()));
    path.with_file_name(name)
}

/// Writes through `write` into a sibling temporary file, then renames it
/// over `path`, so readers never see a half-written file.
pub fn write_atomic<F>(path: &Path, write: F) -> Result<()>
where
    F: FnOnce(&Path) -> Result<()>,
{
    let tmp = tmp_path(path);
    if let Err(e) = write(&tmp) {
        let _ = fs::remove_file(&tmp);
        return Err(e);
    }
    fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}

pub(crate) fn write_csv_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    write_atomic(path, |tmp| {
        let file = File::create(tmp).map_err(|e| HarnessError::io(tmp, e))?;
        let mut w = ::csv::Writer::from_writer(file);
        for row in rows {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| HarnessError::io(tmp, e))
    })
}

pub(crate) fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    write_atomic(path, |tmp| {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        fs::write(tmp, text).map_err(|e| HarnessError::io(tmp, e))
    })
}

/// Reads back any CSV written by the harness.
pub fn read_csv_rows<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    let mut r = ::csv::Reader::from_reader(file);
    r.deserialize().map(|row| row.map_err(HarnessError::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn run_rows_round_trip_with_missing_fields() {
        let rows = vec![
            RunRow {
                algorithm: Algorithm::HalsRp,
                seed: 2,
                k: 3,
                q: Some(8),
                w: Some(1),
                alpha: 0.1,
                beta: 0.0,
                status: RunStatus::Ok,
                final_error: Some(1.5e-3),
                gini_b: Some(0.25),
                iterations_run: Some(40),
                converged: Some(false),
                median_seconds_per_update: Some(1e-5),
                message: String::new(),
            },
            RunRow {
                algorithm: Algorithm::Mu,
                seed: 1,
                k: 3,
                q: None,
                w: None,
                alpha: 0.0,
                beta: 0.0,
                status: RunStatus::Failed,
                final_error: None,
                gini_b: None,
                iterations_run: None,
                converged: None,
                median_seconds_per_update: None,
                message: "invalid, with comma".into(),
            },
        ];
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("runs.csv");
        write_csv_rows(&p, &rows).unwrap();
        let back: Vec<RunRow> = read_csv_rows(&p).unwrap();
        assert_eq!(back, rows);
        assert!(fs::read_dir(dir.path()).unwrap().count() == 1, "temp file left behind");
    }

    #[test]
    fn failed_write_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.json");
        let r = write_atomic(&p, |tmp| {
            fs::write(tmp, "partial").unwrap();
            Err(HarnessError::Config("boom".into()))
        });
        assert!(r.is_err());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }
}
