//! Prints the FLOP and memory model for face-image and text-corpus sized
//! problems.

use rpnmf::metrics::estimate_cost;
use rpnmf::Algorithm;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (label, d, n, k, q) in [("faces", 400, 4096, 20, 25), ("text", 5000, 1000, 60, 72)] {
        println!("{label}: d={d} n={n} k={k} q={q}");
        for algo in Algorithm::ALL {
            let est = estimate_cost(algo, d, n, k, algo.is_compressed().then_some(q))?;
            println!(
                "  {:<12} {:>10.1} Mflop/iter {:>10} floats",
                algo.name(),
                est.flops_per_iteration as f64 / 1e6,
                est.memory_floats
            );
        }
    }
    Ok(())
}
