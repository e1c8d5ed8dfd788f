//! Association measures on pseudo-observations.
//!
//! Every statistic here estimates a population functional of the form
//! `θ = E[s(U₁,…,U_r) · t(V₁,…,V_r)]` for degree-`r` kernels `s`, `t` with
//! zero marginal means, estimated by the plug-in V-statistic
//!
//! ```text
//! θ̂ = n^(−r) Σ s(u_{i₁},…,u_{i_r}) · t(v_{i₁},…,v_{i_r}),
//! ```
//!
//! the sum running over all `n^r` index tuples with repetition. The
//! brute-force enumerator in [`vstat`] is the correctness authority; the
//! per-statistic modules provide algebraically equivalent fast paths that
//! must match it to 1e-10 on small samples (see the acceptance suite).

mod corr;
mod hoeffding;
mod kappa;
mod taustar;
pub mod vstat;

pub(crate) mod evaluator;

pub use corr::{kendall_tau, pearson_r};
pub use hoeffding::hoeffding_delta;
pub use kappa::kappa_stat;
pub use taustar::tau_star;
pub use vstat::{
    v_statistic_bruteforce, v_statistic_bruteforce_with_budget, DEFAULT_TUPLE_BUDGET,
};

use serde::{Deserialize, Serialize};

use crate::data::Sample;
use crate::error::{Error, Result};
use crate::kernel::{nw_regression, EstimatorConfig};

/// Which tail of the permutation distribution counts as evidence.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    /// Reject for large `|T|`; for signed statistics where both directions
    /// indicate dependence.
    TwoSided,
    /// Reject for large `T`; for statistics that are nonnegative under the
    /// alternative and centered near zero under independence.
    Upper,
}

impl Sidedness {
    pub fn name(self) -> &'static str {
        match self {
            Sidedness::TwoSided => "two_sided",
            Sidedness::Upper => "upper",
        }
    }
}

impl std::fmt::Display for Sidedness {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// The built-in association statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StatisticKind {
    /// Sample correlation coefficient (degree-2 kernel `u₁ − u₂`).
    Pearson,
    /// Kendall's tau-a (degree-2 kernel `sign(u₁ − u₂)`).
    Kendall,
    /// Hoeffding's Δ (degree-5 kernel built from
    /// `φ(a,b,c) = I(b ≤ a) − I(c ≤ a)`).
    HoeffdingDelta,
    /// The L1 distance-covariance-type κ (degree-4 kernel
    /// `a(z₁,z₂,z₃,z₄) = |z₁−z₂| + |z₃−z₄| − |z₁−z₃| − |z₂−z₄|`).
    Kappa,
    /// The sign covariance τ* (degree-4 kernel `sign(a(z₁,z₂,z₃,z₄))`).
    TauStar,
}

impl StatisticKind {
    pub const ALL: [StatisticKind; 5] = [
        StatisticKind::Pearson,
        StatisticKind::Kendall,
        StatisticKind::HoeffdingDelta,
        StatisticKind::Kappa,
        StatisticKind::TauStar,
    ];

    /// Kernel degree `r` of the defining V-statistic.
    pub fn degree(self) -> usize {
        match self {
            StatisticKind::Pearson | StatisticKind::Kendall => 2,
            StatisticKind::Kappa | StatisticKind::TauStar => 4,
            StatisticKind::HoeffdingDelta => 5,
        }
    }

    /// Conventional rejection direction: two-sided for the signed pair,
    /// upper-tailed for the statistics that are zero exactly under
    /// independence and positive under dependence.
    pub fn default_sidedness(self) -> Sidedness {
        match self {
            StatisticKind::Pearson | StatisticKind::Kendall => Sidedness::TwoSided,
            _ => Sidedness::Upper,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StatisticKind::Pearson => "pearson",
            StatisticKind::Kendall => "kendall",
            StatisticKind::HoeffdingDelta => "hoeffding_delta",
            StatisticKind::Kappa => "kappa",
            StatisticKind::TauStar => "tau_star",
        }
    }

    /// Parse a statistic name, accepting the common short aliases.
    pub fn parse(name: &str) -> Result<Self> {
        match name.trim().to_ascii_lowercase().as_str() {
            "pearson" | "rho" => Ok(StatisticKind::Pearson),
            "kendall" | "tau" | "kendall_tau" => Ok(StatisticKind::Kendall),
            "hoeffding" | "hoeffding_delta" | "delta" => Ok(StatisticKind::HoeffdingDelta),
            "kappa" => Ok(StatisticKind::Kappa),
            "taustar" | "tau_star" | "tau-star" => Ok(StatisticKind::TauStar),
            other => Err(Error::InvalidArgument(format!(
                "unknown statistic {other:?}; valid names: pearson, kendall, hoeffding, kappa, taustar"
            ))),
        }
    }
}

impl std::str::FromStr for StatisticKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StatisticKind::parse(s)
    }
}

impl std::fmt::Display for StatisticKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A statistic together with its rejection direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatisticSpec {
    pub kind: StatisticKind,
    pub sidedness: Sidedness,
}

impl StatisticSpec {
    /// The statistic with its conventional sidedness.
    pub fn of(kind: StatisticKind) -> Self {
        StatisticSpec {
            kind,
            sidedness: kind.default_sidedness(),
        }
    }

    pub fn with_sidedness(mut self, sidedness: Sidedness) -> Self {
        self.sidedness = sidedness;
        self
    }
}

/// A computed statistic value with its provenance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct StatisticValue {
    pub kind: StatisticKind,
    pub value: f64,
    pub n: usize,
}

/// Evaluate a built-in statistic on paired margins via its fast path.
pub fn evaluate(kind: StatisticKind, us: &[f64], vs: &[f64]) -> Result<StatisticValue> {
    match kind {
        StatisticKind::Pearson => pearson_r(us, vs),
        StatisticKind::Kendall => kendall_tau(us, vs),
        StatisticKind::HoeffdingDelta => hoeffding_delta(us, vs),
        StatisticKind::Kappa => kappa_stat(us, vs),
        StatisticKind::TauStar => tau_star(us, vs),
    }
}

pub(crate) fn check_paired(us: &[f64], vs: &[f64], min_n: usize) -> Result<usize> {
    if us.len() != vs.len() {
        return Err(Error::InvalidArgument(format!(
            "margins must have equal length, got {} and {}",
            us.len(),
            vs.len()
        )));
    }
    if us.len() < min_n {
        return Err(Error::InvalidArgument(format!(
            "need at least {min_n} observations, got {}",
            us.len()
        )));
    }
    if us.iter().chain(vs.iter()).any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "margins must contain only finite values".into(),
        ));
    }
    Ok(us.len())
}

/// The classical partial correlation baseline: regress both responses on
/// the conditioning variable (same kernel and bandwidths as the transform),
/// then correlate the residuals `yᵢ − ĝ(xᵢ)` and `zᵢ − ĥ(xᵢ)`.
///
/// Zero partial correlation does not characterize conditional independence,
/// which is why the partial copula pipeline exists; this baseline is
/// provided for comparison.
pub fn partial_correlation_baseline(
    sample: &Sample,
    config: &EstimatorConfig,
) -> Result<StatisticValue> {
    if sample.n() < 3 {
        return Err(Error::InvalidArgument(format!(
            "partial correlation needs at least 3 rows, got {}",
            sample.n()
        )));
    }
    let (h_y, h_z) = config.resolve(sample.xs())?;
    let xs = sample.xs();
    let xy: Vec<(f64, f64)> = xs.iter().copied().zip(sample.ys().iter().copied()).collect();
    let xz: Vec<(f64, f64)> = xs.iter().copied().zip(sample.zs().iter().copied()).collect();
    let mut res_y = Vec::with_capacity(sample.n());
    let mut res_z = Vec::with_capacity(sample.n());
    for (&x, (&y, &z)) in xs.iter().zip(sample.ys().iter().zip(sample.zs())) {
        let g = nw_regression(&xy, config.kernel, h_y, x)?;
        let h = nw_regression(&xz, config.kernel, h_z, x)?;
        res_y.push(y - g);
        res_z.push(z - h);
    }
    pearson_r(&res_y, &res_z)
}
