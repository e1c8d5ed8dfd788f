//! Kernel-weighted estimation of conditional distribution functions.
//!
//! The conditional CDF of a response given a real covariate is estimated by
//! Nadaraya-Watson weighting,
//!
//! ```text
//! F̂(y | x) = Σᵢ K(|x − xᵢ| / h) · I(yᵢ ≤ y)  /  Σᵢ K(|x − xᵢ| / h),
//! ```
//!
//! with a pluggable smoothing kernel `K` and bandwidth `h`. Two bandwidth
//! rules are provided: Silverman's rule of thumb for observed data and a
//! noise-ratio rule `1.75·√(λ/n)` for the simulation model, where the
//! covariate is uniform on `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `1/√(2π)`, the standard normal density at zero.
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Smoothing kernel shapes. Only the standard normal kernel is supported;
/// the weight function is extensible through this enum should another shape
/// ever be needed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kernel {
    #[default]
    Gaussian,
}

impl Kernel {
    /// Kernel weight at scaled distance `u`. Infallible; callers validate
    /// finiteness once at the API boundary.
    #[inline]
    pub fn weight(self, u: f64) -> f64 {
        match self {
            Kernel::Gaussian => FRAC_1_SQRT_2PI * (-0.5 * u * u).exp(),
        }
    }
}

/// Standard normal density at `u`, the weight used throughout.
pub fn gaussian_kernel(u: f64) -> Result<f64> {
    if !u.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "kernel argument must be finite, got {u}"
        )));
    }
    Ok(Kernel::Gaussian.weight(u))
}

/// A strictly positive, finite smoothing bandwidth in the units of the
/// conditioning variable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bandwidth(f64);

impl Bandwidth {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() && value > 0.0 {
            Ok(Bandwidth(value))
        } else {
            Err(Error::InvalidArgument(format!(
                "bandwidth must be positive and finite, got {value}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }
}

/// Silverman's rule of thumb `1.06 · sd(xs) · n^(−1/5)`.
///
/// The standard deviation uses the n−1 divisor.
pub fn silverman_bandwidth(xs: &[f64]) -> Result<Bandwidth> {
    let n = xs.len();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "Silverman's rule needs at least 2 observations, got {n}"
        )));
    }
    if xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(
            "Silverman's rule needs finite observations".into(),
        ));
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    let sd = (ss / (n as f64 - 1.0)).sqrt();
    if sd == 0.0 {
        return Err(Error::DegenerateSpread);
    }
    Bandwidth::new(1.06 * sd * (n as f64).powf(-0.2))
}

/// The simulation-study rule `1.75 · √(λ/n)` for a noise-to-signal ratio λ
/// and sample size n, calibrated to a covariate uniform on `[0, 1]`.
pub fn sim_bandwidth(lambda: f64, n: usize) -> Result<Bandwidth> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "noise-to-signal ratio must be positive and finite, got {lambda}"
        )));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be positive".into()));
    }
    Bandwidth::new(1.75 * (lambda / n as f64).sqrt())
}

/// How per-margin bandwidths are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum BandwidthRule {
    /// User-supplied bandwidths, one per estimated margin.
    Explicit { y: Bandwidth, z: Bandwidth },
    /// Derive both bandwidths from the conditioning column by Silverman's
    /// rule.
    Silverman,
    /// Derive both bandwidths as `1.75·√(λ/n)`.
    Simulation { lambda: f64 },
}

/// Configuration for the conditional CDF estimators: kernel shape, bandwidth
/// rule, and whether each observation is left out of its own estimate.
///
/// The default evaluates in-sample (observation `i` contributes to its own
/// numerator and denominator), which keeps every transformed value strictly
/// positive. The leave-one-out variant exists for sensitivity analysis only.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub kernel: Kernel,
    #[serde(flatten)]
    pub rule: BandwidthRule,
    pub leave_one_out: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        EstimatorConfig {
            kernel: Kernel::Gaussian,
            rule: BandwidthRule::Silverman,
            leave_one_out: false,
        }
    }
}

impl EstimatorConfig {
    /// Gaussian kernel, Silverman bandwidths, in-sample evaluation.
    pub fn silverman() -> Self {
        Self::default()
    }

    /// Gaussian kernel with the same explicit bandwidth for both margins.
    pub fn explicit(h: Bandwidth) -> Self {
        EstimatorConfig {
            rule: BandwidthRule::Explicit { y: h, z: h },
            ..Self::default()
        }
    }

    /// Gaussian kernel with the simulation rule `1.75·√(λ/n)`.
    pub fn simulation(lambda: f64) -> Self {
        EstimatorConfig {
            rule: BandwidthRule::Simulation { lambda },
            ..Self::default()
        }
    }

    pub fn with_leave_one_out(mut self, yes: bool) -> Self {
        self.leave_one_out = yes;
        self
    }

    /// Resolve the rule to concrete `(h_y, h_z)` for a conditioning column.
    pub fn resolve(&self, xs: &[f64]) -> Result<(Bandwidth, Bandwidth)> {
        match self.rule {
            BandwidthRule::Explicit { y, z } => Ok((y, z)),
            BandwidthRule::Silverman => {
                let h = silverman_bandwidth(xs)?;
                Ok((h, h))
            }
            BandwidthRule::Simulation { lambda } => {
                let h = sim_bandwidth(lambda, xs.len())?;
                Ok((h, h))
            }
        }
    }
}

/// Kernel weight sums underflow below this threshold raise
/// [`Error::DegenerateWeights`] instead of silently dividing by zero.
const WEIGHT_SUM_FLOOR: f64 = 1e-300;

/// Nadaraya-Watson estimate of `F(y | x)` from `(xᵢ, yᵢ)` pairs:
/// `Σᵢ K(|x − xᵢ|/h)·I(yᵢ ≤ y) / Σᵢ K(|x − xᵢ|/h)`.
///
/// For fixed `x` the result is a right-continuous nondecreasing step
/// function of `y` with values in `[0, 1]`, reaching 1 at the largest `yᵢ`.
pub fn nw_conditional_cdf(
    pairs: &[(f64, f64)],
    kernel: Kernel,
    h: Bandwidth,
    query: (f64, f64),
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument(
            "conditional CDF needs at least one observation".into(),
        ));
    }
    if pairs.iter().any(|&(x, y)| !x.is_finite() || !y.is_finite())
        || !query.0.is_finite()
        || !query.1.is_finite()
    {
        return Err(Error::InvalidArgument(
            "conditional CDF needs finite data and query".into(),
        ));
    }
    let (x, y) = query;
    let mut num = 0.0;
    let mut den = 0.0;
    for &(xi, yi) in pairs {
        let w = kernel.weight((x - xi).abs() / h.value());
        den += w;
        if yi <= y {
            num += w;
        }
    }
    if den < WEIGHT_SUM_FLOOR {
        return Err(Error::DegenerateWeights { row: None });
    }
    // Guard against roundoff pushing the ratio a few ulps past 1.
    Ok((num / den).clamp(0.0, 1.0))
}

/// Nadaraya-Watson regression estimate `ĝ(x) = Σᵢ K(|x − xᵢ|/h)·yᵢ / Σᵢ K(...)`,
/// the conditional-mean counterpart of [`nw_conditional_cdf`]. Used by the
/// partial correlation baseline.
pub fn nw_regression(
    pairs: &[(f64, f64)],
    kernel: Kernel,
    h: Bandwidth,
    x: f64,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::InvalidArgument(
            "regression needs at least one observation".into(),
        ));
    }
    if pairs.iter().any(|&(xi, yi)| !xi.is_finite() || !yi.is_finite()) || !x.is_finite() {
        return Err(Error::InvalidArgument(
            "regression needs finite data and query".into(),
        ));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for &(xi, yi) in pairs {
        let w = kernel.weight((x - xi).abs() / h.value());
        den += w;
        num += w * yi;
    }
    if den < WEIGHT_SUM_FLOOR {
        return Err(Error::DegenerateWeights { row: None });
    }
    Ok(num / den)
}
