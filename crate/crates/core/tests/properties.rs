use proptest::prelude::*;

use rpnmf::compression::{build_projectors, SketchConfig};
use rpnmf::data::{read_matrix_market, save_matrix_market};
use rpnmf::linalg::{clamp_nonnegative, matmul, thin_qr, DenseMatrix, FactorPair, MatrixOperand};
use rpnmf::metrics::{gini_of, reconstruction_error};
use rpnmf::solvers::{
    fasthals_rp_step, fasthals_step, hals_step, initialize, mu_rp_step, mu_step, reinit_rng,
    CompressedData, Penalty, ProjectedFactors,
};
use rpnmf::SparseMatrix;

fn matrix(max_rows: usize, max_cols: usize, lo: f64, hi: f64) -> impl Strategy<Value = DenseMatrix> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(move |(r, c)| {
        prop::collection::vec(lo..hi, r * c)
            .prop_map(move |v| DenseMatrix::new(r, c, v).unwrap())
    })
}

/// Non-negative data with at least 2 rows and columns, plus a valid rank.
fn instance() -> impl Strategy<Value = (DenseMatrix, usize, u64)> {
    (2usize..=25, 2usize..=25, 1usize..=4, any::<u64>()).prop_flat_map(|(d, n, k, seed)| {
        let k = k.min(d).min(n);
        prop::collection::vec(0.0..5.0f64, d * n)
            .prop_map(move |v| (DenseMatrix::new(d, n, v).unwrap(), k, seed))
    })
}

fn sparse_from(m: &DenseMatrix, keep: &[bool]) -> SparseMatrix {
    let (r, c) = m.shape();
    let mut sparse = m.clone();
    for i in 0..r {
        for j in 0..c {
            if !keep[(i * c + j) % keep.len()] {
                sparse.set(i, j, 0.0);
            }
        }
    }
    SparseMatrix::from_dense(&sparse)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn uncompressed_steps_never_increase_error((x, k, seed) in instance()) {
        let (d, n) = x.shape();
        for which in 0..3 {
            let mut f = initialize(d, n, k, seed);
            let mut rng = reinit_rng(seed);
            let mut prev = reconstruction_error(&x, &f);
            for _ in 0..15 {
                match which {
                    0 => mu_step(&x, &mut f).unwrap(),
                    1 => hals_step(&x, &mut f, Penalty::NONE, &mut rng).unwrap(),
                    _ => fasthals_step(&x, &mut f, false, Penalty::NONE, &mut rng).unwrap(),
                }
                let e = reconstruction_error(&x, &f);
                prop_assert!(e <= prev + 1e-9 * prev.max(1.0), "step {which}: {prev} -> {e}");
                prev = e;
            }
        }
    }

    #[test]
    fn compressed_steps_keep_factors_nonnegative((x, k, seed) in instance(), w in 0usize..3) {
        let (d, n) = x.shape();
        let q = (k + 2).min(d).min(n);
        let pair = build_projectors(&x, &SketchConfig::new(q, w, seed)).unwrap();
        let data = CompressedData::new(&x, &pair).unwrap();
        for which in 0..2 {
            let mut f = initialize(d, n, k, seed);
            let mut proj = ProjectedFactors::compute(&pair, &f).unwrap();
            let mut rng = reinit_rng(seed);
            for _ in 0..10 {
                if which == 0 {
                    mu_rp_step(&data, &mut f, &mut proj).unwrap();
                } else {
                    fasthals_rp_step(&data, &mut f, &mut proj, true, Penalty { alpha: 0.1, beta: 0.1 }, &mut rng).unwrap();
                }
            }
            prop_assert!(f.is_nonnegative());
            prop_assert!(f.a.is_finite() && f.b.is_finite());
        }
    }

    #[test]
    fn qr_is_orthonormal_and_reconstructs(
        (rows, cols, seed) in (1usize..=200, 1usize..=50, any::<u64>())
            .prop_filter("tall", |(r, c, _)| r >= c)
    ) {
        let m = rpnmf::compression::gaussian_sketch(rows, cols, seed);
        let (q, r) = thin_qr(&m).unwrap();
        let qtq = matmul(&q, &q, true, false).unwrap();
        prop_assert!(qtq.max_abs_diff(&DenseMatrix::identity(cols)).unwrap() < 1e-10);
        let qr = matmul(&q, &r, false, false).unwrap();
        prop_assert!(qr.max_abs_diff(&m).unwrap() < 1e-9 * m.max_abs().max(1.0));
        for i in 0..cols {
            for j in 0..i {
                prop_assert_eq!(r.get(i, j), 0.0);
            }
        }
    }

    #[test]
    fn transposed_products_agree(a in matrix(12, 9, -3.0, 3.0), cols in 1usize..6, seed in any::<u64>()) {
        let b = rpnmf::compression::gaussian_sketch(a.rows(), cols, seed);
        // (Aᵀ B)ᵀ = Bᵀ A
        let left = matmul(&a, &b, true, false).unwrap().transpose();
        let right = matmul(&b, &a, true, false).unwrap();
        prop_assert!(left.max_abs_diff(&right).unwrap() < 1e-12);
        let explicit = matmul(&a.transpose(), &b, false, false).unwrap().transpose();
        prop_assert!(explicit.max_abs_diff(&right).unwrap() < 1e-12);
    }

    #[test]
    fn sparse_and_dense_operands_agree(
        m in matrix(15, 15, 0.0, 4.0),
        keep in prop::collection::vec(any::<bool>(), 1..7),
        seed in any::<u64>(),
    ) {
        let s = sparse_from(&m, &keep);
        let dense = s.to_dense();
        prop_assert!((s.frobenius_norm_sq() - dense.frobenius_norm_sq()).abs() < 1e-10);
        let f = FactorPair::new(
            rpnmf::compression::gaussian_sketch(m.rows(), 2, seed),
            rpnmf::compression::gaussian_sketch(m.cols(), 2, seed ^ 1),
        ).unwrap();
        let es = reconstruction_error(&s, &f);
        let ed = reconstruction_error(&dense, &f);
        prop_assert!((es - ed).abs() <= 1e-9 * ed.max(1.0));
        for (tl, rhs) in [(false, &f.b), (true, &f.a)] {
            let ps = s.product(rhs, tl, false).unwrap();
            let pd = dense.product(rhs, tl, false).unwrap();
            prop_assert!(ps.max_abs_diff(&pd).unwrap() < 1e-10);
        }
    }

    #[test]
    fn clamp_is_idempotent_and_nonnegative(v in prop::collection::vec(-1e6..1e6f64, 0..50)) {
        let once = clamp_nonnegative(&v);
        prop_assert!(once.iter().all(|x| *x >= 0.0 && x.is_sign_positive()));
        let twice = clamp_nonnegative(&once);
        prop_assert!(once.iter().zip(&twice).all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    #[test]
    fn gini_is_scale_and_permutation_invariant(
        v in prop::collection::vec(0.0..10.0f64, 2..60),
        c in 1e-3..1e3f64,
        rot in any::<prop::sample::Index>(),
    ) {
        prop_assume!(v.iter().any(|x| *x > 0.0));
        let g = gini_of(&v).unwrap();
        prop_assert!((0.0..1.0).contains(&g));
        let scaled: Vec<f64> = v.iter().map(|x| c * x).collect();
        prop_assert!((gini_of(&scaled).unwrap() - g).abs() < 1e-12);
        let mut shuffled = v.clone();
        shuffled.rotate_left(rot.index(v.len()));
        shuffled.reverse();
        prop_assert!((gini_of(&shuffled).unwrap() - g).abs() < 1e-12);
    }

    #[test]
    fn matrix_market_round_trips(
        m in matrix(20, 20, -5.0, 5.0),
        keep in prop::collection::vec(any::<bool>(), 1..5),
    ) {
        let s = sparse_from(&m, &keep);
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.mtx");
        save_matrix_market(&s, &p).unwrap();
        let back = read_matrix_market(&p).unwrap();
        prop_assert_eq!(back.to_dense(), s.to_dense());
    }
}
