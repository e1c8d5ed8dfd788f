//! The κ statistic as a V-statistic, in O(n²).
//!
//! κ is the degree-4 V-statistic of `(1/4)·a(u-tuple)·a(v-tuple)` with
//! `a(z₁,z₂,z₃,z₄) = |z₁−z₂| + |z₃−z₄| − |z₁−z₃| − |z₂−z₄|`. Expanding the
//! product and collecting the four free indices shows the statistic equals
//!
//! ```text
//! κ̂ = n^(−2) Σᵢⱼ Ãᵢⱼ B̃ᵢⱼ,
//! ```
//!
//! where `Ãᵢⱼ = Aᵢⱼ − Āᵢ· − Ā·ⱼ + Ā··` is the doubly centered distance
//! matrix `Aᵢⱼ = |uᵢ − uⱼ|` (row, column and grand means with the n
//! divisor), and `B̃` the same for `v`. This is the L1 analogue of distance
//! covariance. The identity is exercised against brute-force enumeration in
//! the acceptance suite.

use crate::error::Result;
use crate::stats::{check_paired, StatisticKind, StatisticValue};

pub fn kappa_stat(us: &[f64], vs: &[f64]) -> Result<StatisticValue> {
    let n = check_paired(us, vs, 1)?;
    let atil = centered_distances(us);
    let btil = centered_distances(vs);
    let total: f64 = atil.iter().zip(&btil).map(|(a, b)| a * b).sum();
    Ok(StatisticValue {
        kind: StatisticKind::Kappa,
        value: total / (n * n) as f64,
        n,
    })
}

/// Doubly centered pairwise-distance matrix, row-major.
pub(crate) fn centered_distances(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut d = vec![0.0f64; n * n];
    let mut row_mean = vec![0.0f64; n];
    for i in 0..n {
        let mut sum = 0.0;
        for j in 0..n {
            let v = (xs[i] - xs[j]).abs();
            d[i * n + j] = v;
            sum += v;
        }
        row_mean[i] = sum / n as f64;
    }
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    for i in 0..n {
        for j in 0..n {
            // Distances are symmetric, so the column mean is row_mean[j].
            d[i * n + j] += grand - row_mean[i] - row_mean[j];
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_margin_is_zero() {
        let us = [4.0, 4.0, 4.0];
        let vs = [1.0, 2.0, 3.0];
        assert_relative_eq!(kappa_stat(&us, &vs).unwrap().value, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn two_point_value() {
        let pts = [0.0, 1.0];
        assert_relative_eq!(kappa_stat(&pts, &pts).unwrap().value, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn self_paired_margins_are_nonnegative() {
        // With identical margins every summand is a square.
        let us = [0.2, 0.9, 0.4, 0.4, 0.7];
        assert!(kappa_stat(&us, &us).unwrap().value >= 0.0);
    }

    #[test]
    fn not_invariant_under_nonlinear_monotone_maps() {
        // κ depends on distances, not only on ranks.
        let us: [f64; 4] = [0.1, 0.4, 0.9, 0.2];
        let vs = [0.3, 0.8, 0.1, 0.6];
        let cubed: Vec<f64> = us.iter().map(|u| u.powi(3)).collect();
        let k0 = kappa_stat(&us, &vs).unwrap().value;
        let k1 = kappa_stat(&cubed, &vs).unwrap().value;
        assert!((k0 - k1).abs() > 1e-6);
    }
}
