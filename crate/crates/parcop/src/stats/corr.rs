//! Pearson's correlation and Kendall's tau-a.

use crate::error::{Error, Result};
use crate::stats::vstat::sign;
use crate::stats::{check_paired, StatisticKind, StatisticValue};

/// Sample Pearson correlation coefficient.
pub fn pearson_r(us: &[f64], vs: &[f64]) -> Result<StatisticValue> {
    let n = check_paired(us, vs, 2)?;
    let mean_u = us.iter().sum::<f64>() / n as f64;
    let mean_v = vs.iter().sum::<f64>() / n as f64;
    let (mut suu, mut svv, mut suv) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let du = us[i] - mean_u;
        let dv = vs[i] - mean_v;
        suu += du * du;
        svv += dv * dv;
        suv += du * dv;
    }
    if suu == 0.0 {
        return Err(Error::DegenerateVariance("first margin"));
    }
    if svv == 0.0 {
        return Err(Error::DegenerateVariance("second margin"));
    }
    Ok(StatisticValue {
        kind: StatisticKind::Pearson,
        value: suv / (suu * svv).sqrt(),
        n,
    })
}

/// Kendall's tau-a: `(#concordant − #discordant) / (n(n−1)/2)`, with tied
/// pairs contributing zero through `sign(0) = 0`.
pub fn kendall_tau(us: &[f64], vs: &[f64]) -> Result<StatisticValue> {
    let n = check_paired(us, vs, 2)?;
    let mut net = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            net += sign(us[i] - us[j]) * sign(vs[i] - vs[j]);
        }
    }
    let pairs = (n * (n - 1) / 2) as f64;
    Ok(StatisticValue {
        kind: StatisticKind::Kendall,
        value: net / pairs,
        n,
    })
}
