use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::output::{write_atomic, write_csv_rows, write_json};
use super::{
    CellParams, DistortionFile, ExperimentPlan, HarnessError, MatrixFormat, Result, RunRow,
    RunStatus, Summary, SweepCell, TableRow, TraceRow,
};
use crate::compression::{build_projectors, SketchConfig};
use crate::data::{save_dense_csv, save_matrix_market, Dataset, DatasetDescriptor};
use crate::linalg::{DenseMatrix, MatrixOperand, SparseMatrix};
use crate::metrics::{estimate_cost, median, pairwise_distortion, ProjectionSide, RunTrace};
use crate::solvers::{run, Algorithm, SolverConfig, SolverError};

/// What a command did: how many solver runs, how many failed, and which
/// files it wrote.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CommandOutcome {
    pub runs: usize,
    pub failed: usize,
    pub outputs: Vec<PathBuf>,
}

impl CommandOutcome {
    pub fn success(&self) -> bool {
        self.failed == 0
    }
}

fn load(plan: &ExperimentPlan) -> Result<Dataset> {
    let path = match &plan.dataset {
        DatasetDescriptor::DenseCsv { path, .. }
        | DatasetDescriptor::PgmDirectory { path }
        | DatasetDescriptor::MatrixMarket { path }
        | DatasetDescriptor::Corpus { path, .. } => Some(path),
        DatasetDescriptor::Synthetic(_) | DatasetDescriptor::LowRank { .. } => None,
    };
    if let Some(p) = path {
        if !p.exists() {
            return Err(HarnessError::InputMissing(p.clone()));
        }
    }
    Ok(plan.dataset.load()?)
}

fn prepare_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

type RunResult = std::result::Result<RunTrace, (String, Option<RunTrace>)>;

fn run_one(x: &dyn MatrixOperand, cfg: &SolverConfig) -> RunResult {
    match run(x, cfg) {
        Ok((_, trace)) => Ok(trace),
        Err(SolverError::NonFinite { iteration, trace }) => Err((
            format!("non-finite error at iteration {iteration}"),
            Some(*trace),
        )),
        Err(e) => Err((e.to_string(), None)),
    }
}

/// Runs every (cell, seed) pair on a pool of `jobs` threads; results come
/// back in task order regardless of scheduling.
fn run_all(
    x: &dyn MatrixOperand,
    plan: &ExperimentPlan,
    cells: &[CellParams],
) -> Result<Vec<(CellParams, u64, RunResult)>> {
    let tasks: Vec<(CellParams, u64)> = cells
        .iter()
        .flat_map(|c| plan.seeds.iter().map(move |&s| (*c, s)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(plan.jobs).build()?;
    Ok(pool.install(|| {
        tasks
            .par_iter()
            .map(|&(cell, seed)| (cell, seed, run_one(x, &plan.solver_config(&cell, seed))))
            .collect()
    }))
}

fn run_row(cell: &CellParams, seed: u64, result: &RunResult) -> RunRow {
    let mut row = RunRow {
        algorithm: cell.algorithm,
        seed,
        k: cell.k,
        q: cell.q,
        w: cell.w,
        alpha: cell.alpha,
        beta: cell.beta,
        status: RunStatus::Ok,
        final_error: None,
        gini_b: None,
        iterations_run: None,
        converged: None,
        median_seconds_per_update: None,
        message: String::new(),
    };
    match result {
        Ok(t) => {
            row.final_error = Some(t.final_error());
            row.gini_b = t.gini_b;
            row.iterations_run = Some(t.iterations_run);
            row.converged = Some(t.converged);
            row.median_seconds_per_update = t.median_update_seconds();
        }
        Err((msg, _)) => {
            row.status = RunStatus::Failed;
            row.message = msg.clone();
        }
    }
    row
}

fn save_matrix(m: &DenseMatrix, path: &Path, format: MatrixFormat) -> Result<()> {
    write_atomic(path, |tmp| match format {
        MatrixFormat::Csv => Ok(save_dense_csv(m, tmp)?),
        MatrixFormat::Mm => Ok(save_matrix_market(&SparseMatrix::from_dense(m), tmp)?),
    })
}

/// Single run of the plan's first algorithm, grid values and seed.
///
/// Writes `A.csv`, `B.csv`, `trace.csv`, `trace.json` and `summary.json`.
/// Nothing is written if the input cannot be loaded or the configuration is
/// invalid; a run that diverges leaves only its trace.
pub fn factorize(plan: &ExperimentPlan) -> Result<CommandOutcome> {
    let [algorithm] = plan.algorithms[..] else {
        return Err(HarnessError::Config("factorize takes exactly one --algo".into()));
    };
    let data = load(plan)?;
    let cfg = plan.solver_config(&plan.first_cell(algorithm), plan.seeds[0]);
    let dir = &plan.out;
    let write_trace = |trace: &RunTrace, outputs: &mut Vec<PathBuf>| -> Result<()> {
        let p = dir.join("trace.csv");
        write_csv_rows(&p, &TraceRow::from_trace(trace))?;
        outputs.push(p);
        let p = dir.join("trace.json");
        write_json(&p, trace)?;
        outputs.push(p);
        Ok(())
    };
    let mut outputs = Vec::new();
    match run(data.operand(), &cfg) {
        Ok((factors, trace)) => {
            prepare_out(dir)?;
            for (name, m) in [("A.csv", &factors.a), ("B.csv", &factors.b)] {
                let p = dir.join(name);
                save_matrix(m, &p, MatrixFormat::Csv)?;
                outputs.push(p);
            }
            write_trace(&trace, &mut outputs)?;
            let p = dir.join("summary.json");
            write_json(&p, &Summary::from_trace(&trace))?;
            outputs.push(p);
            Ok(CommandOutcome {
                runs: 1,
                failed: 0,
                outputs,
            })
        }
        Err(SolverError::NonFinite { iteration, trace }) => {
            prepare_out(dir)?;
            write_trace(&trace, &mut outputs)?;
            Err(SolverError::NonFinite { iteration, trace }.into())
        }
        Err(e) => Err(e.into()),
    }
}

/// Every algorithm of the plan at the first grid values, once per seed.
///
/// Writes `runs.csv` (long-format traces), `summary.csv` (one row per run)
/// and `table.csv` (estimated FLOPs and memory next to the measured median
/// seconds per update).
pub fn compare(plan: &ExperimentPlan) -> Result<CommandOutcome> {
    let data = load(plan)?;
    let (d, n) = data.shape();
    let cells: Vec<CellParams> = plan.algorithms.iter().map(|&a| plan.first_cell(a)).collect();
    let results = run_all(data.operand(), plan, &cells)?;

    let mut traces = Vec::new();
    let mut rows = Vec::new();
    for (cell, seed, result) in &results {
        match result {
            Ok(t) | Err((_, Some(t))) => traces.extend(TraceRow::from_trace(t)),
            Err((_, None)) => {}
        }
        rows.push(run_row(cell, *seed, result));
    }
    let mut table = Vec::new();
    for cell in &cells {
        let Ok(est) = estimate_cost(cell.algorithm, d, n, cell.k, cell.q) else {
            continue;
        };
        let times: Vec<f64> = results
            .iter()
            .filter(|(c, _, _)| c.algorithm == cell.algorithm)
            .filter_map(|(_, _, r)| r.as_ref().ok())
            .flat_map(|t| t.update_seconds.iter().copied())
            .collect();
        table.push(TableRow {
            algorithm: cell.algorithm,
            flops_per_iter: est.flops_per_iteration,
            median_seconds_per_update: median(&times),
            memory_floats: est.memory_floats,
        });
    }

    prepare_out(&plan.out)?;
    let mut outputs = Vec::new();
    let p = plan.out.join("runs.csv");
    write_csv_rows(&p, &traces)?;
    outputs.push(p);
    let p = plan.out.join("summary.csv");
    write_csv_rows(&p, &rows)?;
    outputs.push(p);
    let p = plan.out.join("table.csv");
    write_csv_rows(&p, &table)?;
    outputs.push(p);
    Ok(CommandOutcome {
        runs: rows.len(),
        failed: rows.iter().filter(|r| r.status == RunStatus::Failed).count(),
        outputs,
    })
}

/// Cartesian grid of the plan, once per seed.
///
/// Writes `sweep_runs.csv` (one row per run) and `sweep_cells.csv` (median
/// final error and median Gini(B) per cell over successful seeds).
pub fn sweep(plan: &ExperimentPlan) -> Result<CommandOutcome> {
    let data = load(plan)?;
    let cells = plan.cells();
    let results = run_all(data.operand(), plan, &cells)?;
    let rows: Vec<RunRow> = results.iter().map(|(c, s, r)| run_row(c, *s, r)).collect();

    let summary: Vec<SweepCell> = cells
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mine = &rows[i * plan.seeds.len()..(i + 1) * plan.seeds.len()];
            let errors: Vec<f64> = mine.iter().filter_map(|r| r.final_error).collect();
            let ginis: Vec<f64> = mine.iter().filter_map(|r| r.gini_b).collect();
            SweepCell {
                algorithm: c.algorithm,
                k: c.k,
                q: c.q,
                w: c.w,
                alpha: c.alpha,
                beta: c.beta,
                runs: mine.len(),
                failed: mine.iter().filter(|r| r.status == RunStatus::Failed).count(),
                median_final_error: median(&errors),
                median_gini_b: median(&ginis),
            }
        })
        .collect();

    prepare_out(&plan.out)?;
    let mut outputs = Vec::new();
    let p = plan.out.join("sweep_runs.csv");
    write_csv_rows(&p, &rows)?;
    outputs.push(p);
    let p = plan.out.join("sweep_cells.csv");
    write_csv_rows(&p, &summary)?;
    outputs.push(p);
    Ok(CommandOutcome {
        runs: rows.len(),
        failed: rows.iter().filter(|r| r.status == RunStatus::Failed).count(),
        outputs,
    })
}

/// Builds projectors at the first `q`, `w` and seed, then writes `X_hat`
/// (q×n), `X_check` (d×q) and `distortion.json` for both projectors.
pub fn project(plan: &ExperimentPlan) -> Result<CommandOutcome> {
    let q = *plan
        .q
        .first()
        .ok_or_else(|| HarnessError::Config("project needs --q".into()))?;
    let data = load(plan)?;
    let x = data.operand();
    let seed = plan.seeds[0];
    let sketch = SketchConfig::new(q, plan.w[0], seed);
    let projectors = build_projectors(x, &sketch)?;
    let x_hat = projectors.compress_left(x)?;
    let x_check = projectors.compress_right(x)?;
    let report = DistortionFile {
        left: pairwise_distortion(x, &projectors, ProjectionSide::Left, plan.sample_pairs, seed)?,
        right: pairwise_distortion(x, &projectors, ProjectionSide::Right, plan.sample_pairs, seed)?,
    };

    prepare_out(&plan.out)?;
    let ext = match plan.output_format {
        MatrixFormat::Csv => "csv",
        MatrixFormat::Mm => "mtx",
    };
    let mut outputs = Vec::new();
    for (name, m) in [("X_hat", &x_hat), ("X_check", &x_check)] {
        let p = plan.out.join(format!("{name}.{ext}"));
        save_matrix(m, &p, plan.output_format)?;
        outputs.push(p);
    }
    let p = plan.out.join("distortion.json");
    write_json(&p, &report)?;
    outputs.push(p);
    Ok(CommandOutcome {
        runs: 0,
        failed: 0,
        outputs,
    })
}

/// Cost estimate as pretty JSON.
pub fn estimate(
    algorithm: Algorithm,
    d: usize,
    n: usize,
    k: usize,
    q: Option<usize>,
) -> Result<String> {
    let q = q.filter(|_| algorithm.is_compressed());
    let est = estimate_cost(algorithm, d, n, k, q)?;
    Ok(serde_json::to_string_pretty(&est)?)
}
