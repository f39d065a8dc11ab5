//! Sweeps the L1 penalty on B and prints the median Gini coefficient, which
//! rises as the penalty grows.

use rpnmf::data::{generate_synthetic, SyntheticSpec};
use rpnmf::metrics::median;
use rpnmf::{run, Algorithm, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let spec = SyntheticSpec {
        d: 200,
        n: 150,
        true_rank: 20,
        decay: 0.5,
        noise_level: 0.0,
        seed: 3,
    };
    let x = generate_synthetic(&spec)?.scale(10.0);
    for alpha in [0.0, 0.01, 0.1, 1.0, 10.0] {
        let mut ginis = Vec::new();
        let mut errors = Vec::new();
        for seed in 1..=5 {
            let cfg = SolverConfig::new(Algorithm::FastHalsRp, 5)
                .with_sketch(10, 2)
                .with_iterations(100)
                .with_penalty(alpha, 0.0)
                .with_seed(seed);
            let (_, trace) = run(&x, &cfg)?;
            ginis.extend(trace.gini_b);
            errors.push(trace.final_error());
        }
        println!(
            "alpha {alpha:>6}: median gini(B) {:.3}, median error {:.3e}",
            median(&ginis).unwrap_or(f64::NAN),
            median(&errors).unwrap()
        );
    }
    Ok(())
}
