//! Runs all six algorithms on the same data and prints final error, time per
//! update and the analytic cost model side by side.

use rpnmf::data::nonnegative_low_rank;
use rpnmf::{run, Algorithm, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = nonnegative_low_rank(600, 300, 10, 0.05, 3)?;
    println!("{:<12} {:>12} {:>12} {:>14} {:>10}", "algorithm", "final error", "s/update", "flops/iter", "memory");
    for algo in Algorithm::ALL {
        let cfg = SolverConfig::new(algo, 10)
            .with_sketch(15, 2)
            .with_iterations(100)
            .with_seed(7);
        let (_, trace) = run(&x, &cfg)?;
        println!(
            "{:<12} {:>12.4e} {:>12.2e} {:>14} {:>10}",
            algo.name(),
            trace.final_error(),
            trace.median_update_seconds().unwrap_or(f64::NAN),
            trace.estimate.flops_per_iteration,
            trace.estimate.memory_floats
        );
    }
    Ok(())
}
