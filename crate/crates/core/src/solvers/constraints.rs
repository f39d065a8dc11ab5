//! Sparsity (L1, `alpha`) and smoothness (squared L2, `beta`) penalized
//! updates for the columns of B.
//!
//! Both forms are written so that `alpha = beta = 0` produces exactly the
//! bits of the unpenalized update.

use crate::linalg::positive_part;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Penalty {
    pub alpha: f64,
    pub beta: f64,
}

impl Penalty {
    pub const NONE: Penalty = Penalty {
        alpha: 0.0,
        beta: 0.0,
    };
}

/// HALS form: `b_j ← [X̂_jᵀ â_j − α]₊ / (â_jᵀ â_j + β)`.
///
/// `numerator` holds `X̂_jᵀ â_j` (or `X_jᵀ a_j` uncompressed) and is
/// overwritten with the new `b_j`.
pub fn hals_b_update(numerator: &mut [f64], a_norm_sq: f64, penalty: Penalty) {
    let denom = a_norm_sq + penalty.beta;
    for v in numerator.iter_mut() {
        *v = positive_part(*v - penalty.alpha) / denom;
    }
}

/// Unpenalized HALS update `b_j ← [X̂_jᵀ â_j / (â_jᵀ â_j)]₊`.
pub fn hals_b_update_unconstrained(numerator: &mut [f64], a_norm_sq: f64) {
    for v in numerator.iter_mut() {
        *v = positive_part(*v / a_norm_sq);
    }
}

/// FastHALS form: `b_j ← [(b_j W_jj + P_j − B W_j − α) / (W_jj + β)]₊`.
///
/// `residual` holds `P_j − (B W)_j`. Evaluated as
/// `b_j · W_jj/(W_jj+β) + (residual − α)/(W_jj+β)` so the unpenalized case
/// reduces to `b_j + residual / W_jj` exactly.
pub fn fasthals_b_update(b_j: &mut [f64], residual: &[f64], w_jj: f64, penalty: Penalty) {
    let denom = w_jj + penalty.beta;
    let keep = w_jj / denom;
    for (b, &r) in b_j.iter_mut().zip(residual) {
        *b = positive_part(*b * keep + (r - penalty.alpha) / denom);
    }
}

/// Unpenalized FastHALS update `b_j ← [b_j + (P_j − B W_j) / W_jj]₊`.
pub fn fasthals_b_update_unconstrained(b_j: &mut [f64], residual: &[f64], w_jj: f64) {
    for (b, &r) in b_j.iter_mut().zip(residual) {
        *b = positive_part(*b + r / w_jj);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NUM: [f64; 6] = [1.25, -0.5, 0.0, -0.0, 3.0e-17, 7.75];
    const B: [f64; 6] = [0.5, 0.1, 0.0, 2.0, 1.0e-3, 0.3];

    fn bits(v: &[f64]) -> Vec<u64> {
        v.iter().map(|x| x.to_bits()).collect()
    }

    #[test]
    fn zero_penalty_is_bitwise_unconstrained() {
        let mut a = NUM;
        let mut b = NUM;
        hals_b_update(&mut a, 0.37, Penalty::NONE);
        hals_b_update_unconstrained(&mut b, 0.37);
        assert_eq!(bits(&a), bits(&b));

        let mut a = B;
        let mut b = B;
        fasthals_b_update(&mut a, &NUM, 1.9, Penalty::NONE);
        fasthals_b_update_unconstrained(&mut b, &NUM, 1.9);
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn large_alpha_shrinks_to_zero() {
        let alpha = NUM.iter().cloned().fold(f64::MIN, f64::max);
        let mut a = NUM;
        hals_b_update(&mut a, 1.0, Penalty { alpha, beta: 0.0 });
        assert!(a.iter().all(|&v| v == 0.0));

        let mut b = B;
        let big = B.iter().zip(&NUM).map(|(b, r)| b * 1.9 + r).fold(f64::MIN, f64::max);
        fasthals_b_update(&mut b, &NUM, 1.9, Penalty { alpha: big, beta: 0.0 });
        assert!(b.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn beta_shrinks_surviving_entries() {
        let mut plain = NUM;
        let mut smooth = NUM;
        hals_b_update(&mut plain, 0.8, Penalty::NONE);
        hals_b_update(&mut smooth, 0.8, Penalty { alpha: 0.0, beta: 10.0 });
        for (p, s) in plain.iter().zip(&smooth) {
            if *p > 0.0 {
                assert!(s.abs() < p.abs());
            }
        }

        let mut plain = B;
        let mut smooth = B;
        fasthals_b_update(&mut plain, &NUM, 1.9, Penalty::NONE);
        fasthals_b_update(&mut smooth, &NUM, 1.9, Penalty { alpha: 0.0, beta: 10.0 });
        for (p, s) in plain.iter().zip(&smooth) {
            if *p > 0.0 {
                assert!(s.abs() < p.abs());
            }
        }
    }
}
