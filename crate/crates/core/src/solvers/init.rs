use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{DenseMatrix, FactorPair};

/// Generator used for factor initialization and dead-component revival.
pub type SolverRng = ChaCha8Rng;

/// Scale of the uniform draws that replace a dead component.
pub const REINIT_SCALE: f64 = 1e-3;

/// A (d×k) and B (n×k) with i.i.d. entries in the open interval (0, 1).
pub fn initialize(d: usize, n: usize, k: usize, seed: u64) -> FactorPair {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |rows: usize| {
        let values: Vec<f64> = (0..rows * k).map(|_| rng.sample(Open01)).collect();
        DenseMatrix::new(rows, k, values).expect("uniform draws are finite")
    };
    let a = draw(d);
    let b = draw(n);
    FactorPair { a, b }
}

/// Revival generator for a run: same seed as the initializer, separate stream.
pub fn reinit_rng(seed: u64) -> SolverRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Refills column `j` of `m` with `REINIT_SCALE · U(0, 1)`.
pub(crate) fn revive_column(m: &mut DenseMatrix, j: usize, rng: &mut SolverRng) {
    let fresh: Vec<f64> = (0..m.rows())
        .map(|_| REINIT_SCALE * rng.sample::<f64, _>(Open01))
        .collect();
    m.write_column(j, &fresh);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_open_unit_interval() {
        let f = initialize(7, 5, 3, 11);
        assert_eq!(f, initialize(7, 5, 3, 11));
        assert_ne!(f, initialize(7, 5, 3, 12));
        assert!(f
            .a
            .as_slice()
            .iter()
            .chain(f.b.as_slice())
            .all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn shapes_follow_k() {
        let f = initialize(4, 6, 2, 0);
        assert_eq!((f.a.shape(), f.b.shape()), ((4, 2), (6, 2)));
        let g = initialize(4, 6, 5, 0);
        assert_eq!((g.a.shape(), g.b.shape()), ((4, 5), (6, 5)));
    }

    #[test]
    fn revival_is_small_and_positive() {
        let mut m = DenseMatrix::zeros(10, 2);
        let mut rng = reinit_rng(3);
        revive_column(&mut m, 1, &mut rng);
        let c = m.column(1).unwrap();
        assert!(c.iter().all(|&v| v > 0.0 && v < REINIT_SCALE));
        assert_eq!(m.column(0).unwrap(), vec![0.0; 10]);
    }
}
