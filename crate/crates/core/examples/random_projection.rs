//! Builds the structured random projectors for a low-rank matrix and reports
//! how much of X they capture and how well they preserve distances.

use rpnmf::compression::{build_projectors, SketchConfig};
use rpnmf::data::nonnegative_low_rank;
use rpnmf::linalg::{matmul, MatrixOperand};
use rpnmf::metrics::{pairwise_distortion, ProjectionSide};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let x = nonnegative_low_rank(300, 200, 8, 0.01, 5)?;
    let norm = x.frobenius_norm_sq().sqrt();
    for w in 0..=3 {
        let pair = build_projectors(&x, &SketchConfig::new(13, w, 1))?;
        let l = pair.left();
        let captured = matmul(l, &pair.compress_left(&x)?, false, false)?;
        let residual = x.sub(&captured)?.frobenius_norm_sq().sqrt() / norm;
        let left = pairwise_distortion(&x, &pair, ProjectionSide::Left, 2000, 0)?;
        let right = pairwise_distortion(&x, &pair, ProjectionSide::Right, 2000, 0)?;
        println!(
            "w={w}: |X - LLtX|/|X| = {residual:.2e}, max distortion left {:.2e}, right {:.2e}",
            left.max_relative_distortion, right.max_relative_distortion
        );
    }
    Ok(())
}
