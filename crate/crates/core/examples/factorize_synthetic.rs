//! Factorizes a noisy rank-5 matrix with FastHALS and prints the error trace.

use rpnmf::data::nonnegative_low_rank;
use rpnmf::{run, Algorithm, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = nonnegative_low_rank(120, 80, 5, 0.01, 42)?;
    let cfg = SolverConfig::new(Algorithm::FastHals, 5)
        .with_iterations(300)
        .with_error_interval(25)
        .with_seed(1);
    let (factors, trace) = run(&x, &cfg)?;

    for r in &trace.records {
        println!("iter {:>4}  error {:.6e}", r.iteration, r.error);
    }
    println!(
        "A {:?}, B {:?}, converged: {}, gini(B) = {:.3}",
        factors.a.shape(),
        factors.b.shape(),
        trace.converged,
        trace.gini_b.unwrap_or(f64::NAN)
    );
    Ok(())
}
