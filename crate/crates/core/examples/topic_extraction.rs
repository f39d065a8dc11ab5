//! Builds a term-frequency matrix from a tiny inline corpus and lists the top
//! words per component.

use rpnmf::data::build_term_frequency;
use rpnmf::{run, Algorithm, MatrixOperand, SolverConfig};

const DOCS: &[&str] = &[
    "the rocket reached orbit and the crew docked with the station",
    "orbit insertion burn went well and the station crew slept",
    "launch delayed by weather at the rocket pad",
    "the goalkeeper saved a penalty in the final minute",
    "the striker scored twice and the team won the final",
    "a late goal sent the team into the cup final",
    "bake the bread at high heat until the crust is brown",
    "knead the dough and let the bread rise overnight",
    "brown butter adds flavor to the dough",
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    const STOP: &[&str] = &["the", "and", "a", "at", "by", "in", "into", "is", "to", "with", "until"];
    let docs: Vec<String> = DOCS
        .iter()
        .map(|d| d.split_whitespace().filter(|w| !STOP.contains(w)).collect::<Vec<_>>().join(" "))
        .collect();
    let tf = build_term_frequency(&docs, 40, docs.len())?;
    // words as rows, documents as columns
    let x = tf.matrix.to_dense().transpose();
    let cfg = SolverConfig::new(Algorithm::Hals, 3)
        .with_iterations(300)
        .with_seed(2);
    let (factors, _) = run(&x, &cfg)?;
    for j in 0..3 {
        let mut weights: Vec<(f64, &str)> = (0..x.rows())
            .map(|i| (factors.a.get(i, j), tf.vocabulary[i].as_str()))
            .collect();
        weights.sort_by(|a, b| b.0.total_cmp(&a.0));
        let top: Vec<&str> = weights.iter().take(5).map(|w| w.1).collect();
        println!("component {j}: {}", top.join(", "));
    }
    Ok(())
}
