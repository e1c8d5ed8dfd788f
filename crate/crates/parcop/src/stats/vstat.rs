//! Brute-force V-statistic enumeration: the correctness oracle.
//!
//! `v_statistic_bruteforce` evaluates `n^(−r) Σ s(u_tuple)·t(v_tuple)` by
//! walking every one of the `n^r` index tuples. No algebraic shortcuts are
//! taken — this is deliberately the slowest, most transparent evaluation,
//! against which every optimized statistic is tested. It also serves
//! user-supplied kernels, for association measures beyond the built-in
//! five.

use crate::error::{Error, Result};

/// Default cap on `n^r` for enumeration.
pub const DEFAULT_TUPLE_BUDGET: u128 = 100_000_000;

/// Exhaustively enumerate the degree-`r` V-statistic with kernels `s`, `t`.
pub fn v_statistic_bruteforce<S, T>(s: S, t: T, r: usize, us: &[f64], vs: &[f64]) -> Result<f64>
where
    S: Fn(&[f64]) -> f64,
    T: Fn(&[f64]) -> f64,
{
    v_statistic_bruteforce_with_budget(s, t, r, us, vs, DEFAULT_TUPLE_BUDGET)
}

/// As [`v_statistic_bruteforce`] with an explicit tuple budget.
pub fn v_statistic_bruteforce_with_budget<S, T>(
    s: S,
    t: T,
    r: usize,
    us: &[f64],
    vs: &[f64],
    budget: u128,
) -> Result<f64>
where
    S: Fn(&[f64]) -> f64,
    T: Fn(&[f64]) -> f64,
{
    let n = crate::stats::check_paired(us, vs, 1)?;
    if r == 0 {
        return Err(Error::InvalidArgument("kernel degree must be positive".into()));
    }
    let tuples = (n as u128)
        .checked_pow(r as u32)
        .ok_or(Error::BudgetExceeded {
            required: u128::MAX,
            budget,
        })?;
    if tuples > budget {
        return Err(Error::BudgetExceeded {
            required: tuples,
            budget,
        });
    }

    // Odometer over index tuples, least-significant position last.
    let mut idx = vec![0usize; r];
    let mut tu = vec![0.0f64; r];
    let mut tv = vec![0.0f64; r];
    let mut acc = 0.0f64;
    loop {
        for (k, &i) in idx.iter().enumerate() {
            tu[k] = us[i];
            tv[k] = vs[i];
        }
        acc += s(&tu) * t(&tv);

        let mut pos = r;
        loop {
            if pos == 0 {
                return Ok(acc / tuples as f64);
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
        }
    }
}

/// `sign` with `sign(0) = 0`, the tie convention used everywhere.
#[inline]
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `φ(a, b, c) = I(a ≥ b) − I(a ≥ c)`, the building block of Hoeffding's Δ.
#[inline]
pub fn phi(a: f64, b: f64, c: f64) -> f64 {
    (a >= b) as i32 as f64 - (a >= c) as i32 as f64
}

/// Degree-5 kernel of Hoeffding's Δ: `φ(t₁,t₂,t₃)·φ(t₁,t₄,t₅)`. The
/// statistic carries an overall factor 1/4.
#[inline]
pub fn hoeffding_kernel(t: &[f64]) -> f64 {
    phi(t[0], t[1], t[2]) * phi(t[0], t[3], t[4])
}

/// Degree-4 kernel of κ:
/// `a(z₁,z₂,z₃,z₄) = |z₁−z₂| + |z₃−z₄| − |z₁−z₃| − |z₂−z₄|`. The statistic
/// carries an overall factor 1/4.
#[inline]
pub fn kappa_kernel(t: &[f64]) -> f64 {
    (t[0] - t[1]).abs() + (t[2] - t[3]).abs() - (t[0] - t[2]).abs() - (t[1] - t[3]).abs()
}

/// Degree-4 kernel of τ*: `sign(a(z₁,z₂,z₃,z₄))`.
///
/// Numerical caveat: `a` is a sum of four distances, so on a quadruple
/// where it is mathematically zero the floating-point value can come out
/// as ±1e-16 and the sign misclassifies. Zeros are not exotic: beyond
/// tied quadruples, any quadruple with a repeated value whose remaining
/// value lies between the other two telescopes to zero — and V-statistics
/// evaluate every repeated-index tuple, so this arises on *every* dataset,
/// tied or not. The evaluation is exact only when all pairwise distances
/// are exactly representable (integers, dyadic rationals such as
/// multiples of 1/8); on generic continuous data the resulting
/// V-statistic carries a bias of a few parts in 10³. The production path
/// in [`crate::stats::tau_star`] classifies the sign combinatorially and
/// has no such edge.
#[inline]
pub fn tau_star_kernel(t: &[f64]) -> f64 {
    sign(kappa_kernel(t))
}

/// Degree-2 difference kernel `t₁ − t₂`; its V-statistic is twice the
/// (n-divisor) sample covariance.
#[inline]
pub fn diff_kernel(t: &[f64]) -> f64 {
    t[0] - t[1]
}

/// Degree-2 sign kernel `sign(t₁ − t₂)`; its V-statistic is Kendall's tau-a
/// scaled by `(n−1)/n`.
#[inline]
pub fn sign_diff_kernel(t: &[f64]) -> f64 {
    sign(t[0] - t[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_margin_with_difference_kernel_vanishes() {
        let us = [2.0, 2.0, 2.0];
        let vs = [1.0, 5.0, 9.0];
        let v = v_statistic_bruteforce(diff_kernel, diff_kernel, 2, &us, &vs).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn kappa_two_point_enumeration() {
        // All 16 tuples over (0,1): only the four split patterns
        // contribute a·a = 4, giving (1/4)·(16/16) = 0.25.
        let pts = [0.0, 1.0];
        let v = v_statistic_bruteforce(kappa_kernel, kappa_kernel, 4, &pts, &pts).unwrap();
        assert_relative_eq!(0.25 * v, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn single_observation_degree_two_is_zero() {
        let v = v_statistic_bruteforce(diff_kernel, diff_kernel, 2, &[7.0], &[3.0]).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn hoeffding_two_point_enumeration() {
        // 32 tuples over (0,1); 4 contribute, so (1/4)·(4/32) = 0.03125.
        let pts = [0.0, 1.0];
        let v =
            v_statistic_bruteforce(hoeffding_kernel, hoeffding_kernel, 5, &pts, &pts).unwrap();
        assert_relative_eq!(0.25 * v, 0.03125, epsilon = 1e-15);
    }

    #[test]
    fn tau_star_two_point_enumeration() {
        let pts = [0.0, 1.0];
        let v = v_statistic_bruteforce(tau_star_kernel, tau_star_kernel, 4, &pts, &pts).unwrap();
        assert_relative_eq!(v, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn budget_is_enforced() {
        let us: Vec<f64> = (0..100).map(f64::from).collect();
        let err = v_statistic_bruteforce_with_budget(
            |_| 1.0,
            |_| 1.0,
            5,
            &us,
            &us,
            1_000_000,
        )
        .unwrap_err();
        match err {
            Error::BudgetExceeded { required, budget } => {
                assert_eq!(required, 10_000_000_000);
                assert_eq!(budget, 1_000_000);
            }
            other => panic!("expected budget error, got {other:?}"),
        }
    }

    #[test]
    fn zero_degree_rejected() {
        assert!(matches!(
            v_statistic_bruteforce(|_| 1.0, |_| 1.0, 0, &[1.0], &[1.0]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn sign_convention() {
        assert_eq!(sign(3.2), 1.0);
        assert_eq!(sign(-0.1), -1.0);
        assert_eq!(sign(0.0), 0.0);
    }
}
