//! Hoeffding's Δ as a V-statistic, in O(n²).
//!
//! The defining estimator is the degree-5 V-statistic of
//! `(1/4)·φ(u₁,u₂,u₃)φ(u₁,u₄,u₅) · φ(v₁,v₂,v₃)φ(v₁,v₄,v₅)` with
//! `φ(a,b,c) = I(b ≤ a) − I(c ≤ a)`. Summing the φ products over the four
//! free indices for a fixed first index factorizes: with
//!
//! ```text
//! rᵢ = #{j : uⱼ ≤ uᵢ},  sᵢ = #{j : vⱼ ≤ vᵢ},  cᵢ = #{j : uⱼ ≤ uᵢ ∧ vⱼ ≤ vᵢ},
//! ```
//!
//! each inner sum is `2(n·cᵢ − rᵢsᵢ)` per φ pair, so
//!
//! ```text
//! Δ̂ = n^(−5) Σᵢ (n·cᵢ − rᵢsᵢ)².
//! ```
//!
//! This is the empirical squared gap between the joint CDF and the product
//! of the margins, evaluated at the data points. The identity is exercised
//! against brute-force enumeration (including tied and duplicated values)
//! in the acceptance suite.

use crate::error::Result;
use crate::stats::{check_paired, StatisticKind, StatisticValue};

pub fn hoeffding_delta(us: &[f64], vs: &[f64]) -> Result<StatisticValue> {
    let n = check_paired(us, vs, 1)?;
    Ok(StatisticValue {
        kind: StatisticKind::HoeffdingDelta,
        value: delta_from_counts(us, vs),
        n,
    })
}

pub(crate) fn delta_from_counts(us: &[f64], vs: &[f64]) -> f64 {
    let n = us.len();
    let mut total = 0.0;
    for i in 0..n {
        let (mut r, mut s, mut c) = (0u64, 0u64, 0u64);
        for j in 0..n {
            let below_u = us[j] <= us[i];
            let below_v = vs[j] <= vs[i];
            r += below_u as u64;
            s += below_v as u64;
            c += (below_u && below_v) as u64;
        }
        let gap = (n as u64 * c) as f64 - (r * s) as f64;
        total += gap * gap;
    }
    total / (n as f64).powi(5)
}
