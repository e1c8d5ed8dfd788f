//! The sign covariance τ*, in O(n³/64) via bitset algebra.
//!
//! τ* is the degree-4 V-statistic of `sign(a(u-tuple))·sign(a(v-tuple))`
//! with `a(z₁,z₂,z₃,z₄) = |z₁−z₂| + |z₃−z₄| − |z₁−z₃| − |z₂−z₄|`. The sign
//! of `a` classifies how the quadruple separates:
//!
//! ```text
//! sign a = −1  iff  {z₁,z₂} and {z₃,z₄} are strictly separated,
//! sign a = +1  iff  {z₁,z₃} and {z₂,z₄} are strictly separated,
//! sign a =  0  otherwise (any overlap or boundary tie).
//! ```
//!
//! Writing each separation indicator as a product of strict pairwise
//! comparisons and collecting terms over all `n⁴` index tuples (tuple-index
//! repetitions included, which is what makes this the exact V-statistic)
//! gives
//!
//! ```text
//! n⁴·τ̂* = 4·(T1a + T1b − 2·T2a),
//! T1a = Σᵢⱼ |Mᵢ ∧ Mⱼ|²,   T1b = Σᵢⱼ |Nᵢ ∧ Nⱼ|²,
//! T2a = Σᵢⱼ V[i,j] Σₖ U[i,k]·N[j,k] · |Mᵢ ∧ Uⱼ ∧ Vₖ|,
//! ```
//!
//! where `U[a,b] = I(uₐ < u_b)`, `V[a,b] = I(vₐ < v_b)`, `M = U ∧ V`,
//! `N[a,b] = U[a,b] ∧ V[b,a]`, subscripted letters are bitset rows, and
//! `|·|` is a popcount. Rows pack into ⌈n/64⌉ words, so the T2a triple loop
//! dominates at n³ word operations. The identity is exercised against
//! brute-force enumeration (ties and duplicate indices included) in the
//! acceptance suite.

use crate::error::Result;
use crate::stats::{check_paired, StatisticKind, StatisticValue};

pub fn tau_star(us: &[f64], vs: &[f64]) -> Result<StatisticValue> {
    let n = check_paired(us, vs, 1)?;
    Ok(StatisticValue {
        kind: StatisticKind::TauStar,
        value: tau_star_value(us, vs),
        n,
    })
}

/// Row-major packed boolean matrix; row `i` occupies `w` words.
pub(crate) struct BitMat {
    w: usize,
    words: Vec<u64>,
}

impl BitMat {
    pub(crate) fn new(n: usize) -> Self {
        let w = n.div_ceil(64);
        BitMat {
            w,
            words: vec![0u64; n * w],
        }
    }

    #[inline]
    pub(crate) fn set(&mut self, i: usize, j: usize) {
        self.words[i * self.w + j / 64] |= 1u64 << (j % 64);
    }

    #[inline]
    pub(crate) fn get(&self, i: usize, j: usize) -> bool {
        self.words[i * self.w + j / 64] >> (j % 64) & 1 != 0
    }

    #[inline]
    pub(crate) fn row(&self, i: usize) -> &[u64] {
        &self.words[i * self.w..(i + 1) * self.w]
    }
}

#[inline]
fn popcount_and2(a: &[u64], b: &[u64]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x & y).count_ones() as u64)
        .sum()
}

#[inline]
fn popcount_and3(a: &[u64], b: &[u64], c: &[u64]) -> u64 {
    a.iter()
        .zip(b)
        .zip(c)
        .map(|((x, y), z)| (x & y & z).count_ones() as u64)
        .sum()
}

pub(crate) fn tau_star_value(us: &[f64], vs: &[f64]) -> f64 {
    let n = us.len();
    let mut u = BitMat::new(n);
    let mut v = BitMat::new(n);
    let mut m = BitMat::new(n);
    let mut nn = BitMat::new(n);
    for a in 0..n {
        for b in 0..n {
            let ult = us[a] < us[b];
            let vlt = vs[a] < vs[b];
            let vgt = vs[b] < vs[a];
            if ult {
                u.set(a, b);
                if vlt {
                    m.set(a, b);
                }
                if vgt {
                    nn.set(a, b);
                }
            }
            if vlt {
                v.set(a, b);
            }
        }
    }

    let (mut t1a, mut t1b, mut t2a) = (0u64, 0u64, 0u64);
    for i in 0..n {
        for j in 0..n {
            let g = popcount_and2(m.row(i), m.row(j));
            t1a += g * g;
            let g = popcount_and2(nn.row(i), nn.row(j));
            t1b += g * g;
        }
    }
    for i in 0..n {
        for j in 0..n {
            if !v.get(i, j) {
                continue;
            }
            for k in 0..n {
                if u.get(i, k) && nn.get(j, k) {
                    t2a += popcount_and3(m.row(i), u.row(j), v.row(k));
                }
            }
        }
    }

    let total = 4.0 * (t1a as f64 + t1b as f64 - 2.0 * t2a as f64);
    total / (n as f64).powi(4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::vstat::{kappa_kernel, sign, tau_star_kernel, v_statistic_bruteforce};
    use approx::assert_relative_eq;

    #[test]
    fn sign_classification_matches_kernel() {
        // Spot-check the separation rule against the literal kernel on a
        // grid of quadruples with ties.
        let grid = [0.0, 0.5, 0.5, 1.0, 2.0];
        for &a in &grid {
            for &b in &grid {
                for &c in &grid {
                    for &d in &grid {
                        let lit = sign(kappa_kernel(&[a, b, c, d]));
                        let sep_neg = a.max(b) < c.min(d) || c.max(d) < a.min(b);
                        let sep_pos = a.max(c) < b.min(d) || b.max(d) < a.min(c);
                        let rule = if sep_neg {
                            -1.0
                        } else if sep_pos {
                            1.0
                        } else {
                            0.0
                        };
                        assert_eq!(lit, rule, "quadruple ({a},{b},{c},{d})");
                    }
                }
            }
        }
    }

    #[test]
    fn constant_margin_is_zero() {
        let us = [2.0, 2.0, 2.0, 2.0];
        let vs = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(tau_star(&us, &vs).unwrap().value, 0.0);
    }

    #[test]
    fn two_point_value() {
        let pts = [0.0, 1.0];
        assert_relative_eq!(tau_star(&pts, &pts).unwrap().value, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn matches_bruteforce_with_ties() {
        // Dyadic-rational values so the brute-force kernel's distance sums
        // are exact: `sign` applied to a rounding-noise result near a
        // mathematically tied quadruple would misclassify (see
        // [`tau_star_kernel`]), and that noise is the oracle's, not the
        // fast path's.
        let us = [0.25, 0.5, 0.5, 0.75, 0.125, 0.875];
        let vs = [0.25, 0.25, 0.75, 0.125, 0.5, 0.5];
        let fast = tau_star(&us, &vs).unwrap().value;
        let brute =
            v_statistic_bruteforce(tau_star_kernel, tau_star_kernel, 4, &us, &vs).unwrap();
        assert_relative_eq!(fast, brute, epsilon = 1e-12);
        assert_relative_eq!(fast, 0.08641975308641975, epsilon = 1e-15);
    }

    #[test]
    fn monotone_invariance_is_exact() {
        let us: [f64; 6] = [0.3, 0.1, 0.8, 0.5, 0.5, 0.9];
        let vs = [0.2, 0.7, 0.4, 0.6, 0.1, 0.8];
        let mapped: Vec<f64> = us.iter().map(|x| x.exp()).collect();
        assert_eq!(
            tau_star(&us, &vs).unwrap().value,
            tau_star(&mapped, &vs).unwrap().value
        );
    }

    #[test]
    fn self_paired_margins_are_nonnegative() {
        let us = [0.4, 0.2, 0.9, 0.6, 0.6, 0.3, 0.8];
        assert!(tau_star(&us, &us).unwrap().value >= 0.0);
    }

    #[test]
    fn within_unit_interval() {
        let us = [1.0, 2.0, 3.0, 4.0, 5.0];
        let vs = [5.0, 4.0, 3.0, 2.0, 1.0];
        let t = tau_star(&us, &vs).unwrap().value;
        assert!((-1.0..=1.0).contains(&t));
    }
}
