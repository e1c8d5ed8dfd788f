//! Simulation harness: integrated-Wiener signals, bivariate normal errors,
//! and the power / Type I error / bandwidth-robustness studies.
//!
//! The generative model is
//!
//! ```text
//! Yᵢ = g(xᵢ) + ε_{Y,i},   Zᵢ = h(xᵢ) + ε_{Z,i},   xᵢ ~ Uniform[0,1],
//! ```
//!
//! where `g`, `h` are independent draws of the integrated Wiener process
//! `σ₀·∫₀ˣ W dt` and the error pairs are bivariate normal with zero mean,
//! partial correlation ρ and equal marginal standard deviations
//! `σ_ε = λ·σ₀`. Conditional independence of Y and Z given X holds exactly
//! when ρ = 0, and λ is the noise-to-signal ratio.
//!
//! Determinism: every sampler takes an explicit seed, each replication
//! derives its own seed, and within one replication the signal paths, the
//! design points, and the errors consume separate [`ChaCha8Rng`] streams.
//! The stream separation means changing the path resolution `grid_m`
//! perturbs neither the design points nor the errors — common random
//! numbers for discretization-sensitivity checks.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Sample;
use crate::error::{Error, Result};
use crate::kernel::{sim_bandwidth, Bandwidth, EstimatorConfig};
use crate::perm::{permutation_pvalue, permutation_pvalue_raw, PermutationMode};
use crate::stats::{StatisticKind, StatisticSpec};
use crate::transform::partial_copula_transform;

const STREAM_G: u64 = 1;
const STREAM_H: u64 = 2;
const STREAM_XS: u64 = 3;
const STREAM_ERRORS: u64 = 4;

/// Tags for [`derive_seed`]; distinct per role so no two consumers of a
/// replication seed ever share a stream.
const TAG_CONDITIONAL: u64 = 101;
const TAG_UNCONDITIONAL: u64 = 102;

/// The splitmix64 finalizer: a cheap, well-mixed 64-bit permutation.
fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derive a child seed from a root seed, a role tag, and an index, such
/// that distinct (tag, index) pairs give effectively independent seeds.
pub fn derive_seed(root: u64, tag: u64, index: u64) -> u64 {
    mix(root.wrapping_add(mix(tag.wrapping_add(mix(index)))))
}

/// Configuration of one simulated dataset.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    /// Sample size.
    pub n: usize,
    /// Noise-to-signal ratio λ > 0; the error scale is σ_ε = λ·σ₀.
    pub lambda: f64,
    /// Partial correlation of the error pairs, in [−1, 1].
    pub rho: f64,
    /// Signal scale σ₀ ≥ 0.
    pub sigma0: f64,
    /// Grid resolution for the Wiener paths (linearly interpolated).
    pub grid_m: usize,
    /// Root seed; all randomness flows from it.
    pub seed: u64,
    /// Redraw g and h for every replication of a study (the default), or
    /// fix one pair of paths across replications for sensitivity analysis.
    pub fresh_paths: bool,
}

impl SimConfig {
    pub const DEFAULT_SIGMA0: f64 = 1.0;
    pub const DEFAULT_GRID_M: usize = 1000;

    pub fn new(n: usize, lambda: f64, rho: f64, seed: u64) -> Self {
        SimConfig {
            n,
            lambda,
            rho,
            sigma0: Self::DEFAULT_SIGMA0,
            grid_m: Self::DEFAULT_GRID_M,
            seed,
            fresh_paths: true,
        }
    }

    pub fn with_grid_m(mut self, grid_m: usize) -> Self {
        self.grid_m = grid_m;
        self
    }

    pub fn with_sigma0(mut self, sigma0: f64) -> Self {
        self.sigma0 = sigma0;
        self
    }

    pub fn with_fixed_paths(mut self) -> Self {
        self.fresh_paths = false;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!(
                "simulation needs n ≥ 2, got {}",
                self.n
            )));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "noise-to-signal ratio must be positive and finite, got {}",
                self.lambda
            )));
        }
        if !(self.rho.is_finite() && self.rho.abs() <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "partial correlation must lie in [-1, 1], got {}",
                self.rho
            )));
        }
        if !(self.sigma0.is_finite() && self.sigma0 >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "signal scale must be nonnegative and finite, got {}",
                self.sigma0
            )));
        }
        if self.grid_m < 2 {
            return Err(Error::InvalidArgument(format!(
                "path grid needs at least 2 points, got {}",
                self.grid_m
            )));
        }
        Ok(())
    }

    /// The error scale σ_ε = λ·σ₀.
    pub fn sigma_eps(&self) -> f64 {
        self.lambda * self.sigma0
    }
}

/// A realized signal path on an equally spaced grid over [0, 1], evaluated
/// anywhere by linear interpolation. Always starts at 0.
#[derive(Clone, Debug, PartialEq)]
pub struct SignalPath {
    values: Vec<f64>,
}

impl SignalPath {
    pub fn grid_m(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Linear interpolation; the argument is clamped to [0, 1].
    pub fn eval(&self, x: f64) -> f64 {
        let m = self.values.len();
        let t = x.clamp(0.0, 1.0) * (m - 1) as f64;
        let k = (t as usize).min(m - 2);
        let frac = t - k as f64;
        self.values[k] + frac * (self.values[k + 1] - self.values[k])
    }
}

fn integrated_wiener_with(sigma0: f64, grid_m: usize, rng: &mut ChaCha8Rng) -> SignalPath {
    let dt = 1.0 / (grid_m - 1) as f64;
    let sd = dt.sqrt();
    let mut w = vec![0.0; grid_m];
    for k in 1..grid_m {
        let z: f64 = rng.sample(StandardNormal);
        w[k] = w[k - 1] + sd * z;
    }
    // Trapezoidal cumulative integral of W, scaled by σ₀.
    let mut g = vec![0.0; grid_m];
    for k in 1..grid_m {
        g[k] = g[k - 1] + sigma0 * dt * 0.5 * (w[k - 1] + w[k]);
    }
    SignalPath { values: g }
}

/// Simulate `g(x) = σ₀·∫₀ˣ W dt`: a standard Wiener path `W` on the grid
/// (independent Gaussian increments of variance `1/(m−1)`) followed by a
/// trapezoidal cumulative integral. `g(0) = 0` exactly.
pub fn integrated_wiener(sigma0: f64, grid_m: usize, seed: u64) -> Result<SignalPath> {
    if !(sigma0.is_finite() && sigma0 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "signal scale must be nonnegative and finite, got {sigma0}"
        )));
    }
    if grid_m < 2 {
        return Err(Error::InvalidArgument(format!(
            "path grid needs at least 2 points, got {grid_m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(integrated_wiener_with(sigma0, grid_m, &mut rng))
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Draw the design points and responses for given signal paths, consuming
/// only the design and error streams of `cfg.seed`.
fn sample_from_paths(cfg: &SimConfig, g: &SignalPath, h: &SignalPath) -> Result<Sample> {
    let mut rng_x = stream(cfg.seed, STREAM_XS);
    let xs: Vec<f64> = (0..cfg.n).map(|_| rng_x.gen::<f64>()).collect();

    let mut rng_e = stream(cfg.seed, STREAM_ERRORS);
    let sigma_eps = cfg.sigma_eps();
    let cross = (1.0 - cfg.rho * cfg.rho).sqrt();
    let mut ys = Vec::with_capacity(cfg.n);
    let mut zs = Vec::with_capacity(cfg.n);
    for &x in &xs {
        let z1: f64 = rng_e.sample(StandardNormal);
        let z2: f64 = rng_e.sample(StandardNormal);
        ys.push(g.eval(x) + sigma_eps * z1);
        zs.push(h.eval(x) + sigma_eps * (cfg.rho * z1 + cross * z2));
    }
    Sample::from_columns(xs, ys, zs)
}

/// Generate one dataset together with the signal paths that produced it.
///
/// The paths, the design points, and the errors come from separate
/// streams of `cfg.seed`, so e.g. changing `grid_m` leaves the design
/// points and errors untouched.
pub fn gen_dataset_with_truth(cfg: &SimConfig) -> Result<(Sample, SignalPath, SignalPath)> {
    cfg.validate()?;
    let g = integrated_wiener_with(cfg.sigma0, cfg.grid_m, &mut stream(cfg.seed, STREAM_G));
    let h = integrated_wiener_with(cfg.sigma0, cfg.grid_m, &mut stream(cfg.seed, STREAM_H));
    let sample = sample_from_paths(cfg, &g, &h)?;
    Ok((sample, g, h))
}

/// Generate one dataset from the model.
pub fn gen_dataset(cfg: &SimConfig) -> Result<Sample> {
    gen_dataset_with_truth(cfg).map(|(sample, _, _)| sample)
}

fn std_normal_cdf(t: f64) -> f64 {
    0.5 * libm::erfc(-t / std::f64::consts::SQRT_2)
}

/// The infeasible "oracle" pseudo-observations `(Uᵢ, Vᵢ)` computed from the
/// true conditional CDFs: `Uᵢ = Φ((yᵢ − g(xᵢ))/σ_ε)` and likewise for V.
/// These are exactly what the estimated transform converges to, which makes
/// them the reference margin for convergence checks.
pub fn true_pseudo_margins(
    sample: &Sample,
    g: &SignalPath,
    h: &SignalPath,
    sigma_eps: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(sigma_eps.is_finite() && sigma_eps > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "error scale must be positive and finite, got {sigma_eps}"
        )));
    }
    let us = sample
        .xs()
        .iter()
        .zip(sample.ys())
        .map(|(&x, &y)| std_normal_cdf((y - g.eval(x)) / sigma_eps))
        .collect();
    let vs = sample
        .xs()
        .iter()
        .zip(sample.zs())
        .map(|(&x, &z)| std_normal_cdf((z - h.eval(x)) / sigma_eps))
        .collect();
    Ok((us, vs))
}

/// Weak empirical-CDF ranks `#{xⱼ ≤ xᵢ}/n`: the no-conditioning limit of
/// the transform, used for the unconditional comparison tests.
pub(crate) fn ecdf_ranks(xs: &[f64]) -> Vec<f64> {
    let n = xs.len() as f64;
    xs.iter()
        .map(|&xi| xs.iter().filter(|&&xj| xj <= xi).count() as f64 / n)
        .collect()
}

/// One grid point of a rejection study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectionRow {
    pub rho: f64,
    pub n: usize,
    pub lambda: f64,
    pub statistic: String,
    /// The transform bandwidth used for the conditional test.
    pub bandwidth: f64,
    pub conditional_rejection_rate: f64,
    pub unconditional_rejection_rate: f64,
    pub replications: u64,
    pub resamples: u64,
}

/// Rejection rates across a parameter grid, one row per grid point (and
/// per statistic), in grid order.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct RejectionTable {
    pub rows: Vec<RejectionRow>,
}

impl RejectionTable {
    /// Write as CSV, one row per grid point, headers from the field names.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let out = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_csv_to(out)
    }

    /// Same rows as [`RejectionTable::write_csv`] but to any writer.
    pub fn write_csv_to<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        for row in &self.rows {
            writer.serialize(row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Nominal level of the rejection studies.
pub const ALPHA: f64 = 0.05;

struct StudyPoint {
    rho: f64,
    bandwidth: Option<Bandwidth>,
    tag: u64,
}

fn run_study(
    base: &SimConfig,
    points: &[StudyPoint],
    replications: u64,
    b: u64,
    kinds: &[StatisticKind],
) -> Result<RejectionTable> {
    base.validate()?;
    if replications == 0 {
        return Err(Error::InvalidArgument(
            "need at least one replication".into(),
        ));
    }
    if kinds.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one statistic".into(),
        ));
    }

    let fixed_paths = if base.fresh_paths {
        None
    } else {
        let g = integrated_wiener_with(base.sigma0, base.grid_m, &mut stream(base.seed, STREAM_G));
        let h = integrated_wiener_with(base.sigma0, base.grid_m, &mut stream(base.seed, STREAM_H));
        Some((g, h))
    };

    let mut rows = Vec::with_capacity(points.len() * kinds.len());
    for point in points {
        let est = match point.bandwidth {
            Some(h) => EstimatorConfig::explicit(h),
            None => EstimatorConfig::simulation(base.lambda),
        };
        // Per replication and statistic: (conditional, unconditional)
        // rejection indicators. Summed order-independently, so the result
        // does not depend on how rayon schedules replications.
        let counts: Vec<(u64, u64)> = (0..replications)
            .into_par_iter()
            .map(|rep| -> Result<Vec<(u64, u64)>> {
                let rep_seed = derive_seed(base.seed, point.tag, rep);
                let cfg = SimConfig {
                    rho: point.rho,
                    seed: rep_seed,
                    ..*base
                };
                let sample = match &fixed_paths {
                    Some((g, h)) => sample_from_paths(&cfg, g, h)?,
                    None => gen_dataset(&cfg)?,
                };
                let pseudo = partial_copula_transform(&sample, &est)?;
                let rank_y = ecdf_ranks(sample.ys());
                let rank_z = ecdf_ranks(sample.zs());
                let cond_seed = derive_seed(rep_seed, TAG_CONDITIONAL, 0);
                let uncond_seed = derive_seed(rep_seed, TAG_UNCONDITIONAL, 0);
                kinds
                    .iter()
                    .map(|&kind| {
                        let spec = StatisticSpec::of(kind);
                        let cond = permutation_pvalue(
                            &pseudo,
                            spec,
                            b,
                            cond_seed,
                            PermutationMode::MonteCarlo,
                        )?;
                        let uncond = permutation_pvalue_raw(
                            &rank_y,
                            &rank_z,
                            spec,
                            b,
                            uncond_seed,
                            PermutationMode::MonteCarlo,
                        )?;
                        Ok((
                            (cond.p_value <= ALPHA) as u64,
                            (uncond.p_value <= ALPHA) as u64,
                        ))
                    })
                    .collect()
            })
            .try_reduce(
                || vec![(0, 0); kinds.len()],
                |mut acc, per_rep| {
                    for (a, r) in acc.iter_mut().zip(per_rep) {
                        a.0 += r.0;
                        a.1 += r.1;
                    }
                    Ok(acc)
                },
            )?;

        let bandwidth = match point.bandwidth {
            Some(h) => h,
            None => sim_bandwidth(base.lambda, base.n)?,
        };
        for (kind, &(cond, uncond)) in kinds.iter().zip(&counts) {
            rows.push(RejectionRow {
                rho: point.rho,
                n: base.n,
                lambda: base.lambda,
                statistic: kind.name().to_owned(),
                bandwidth: bandwidth.value(),
                conditional_rejection_rate: cond as f64 / replications as f64,
                unconditional_rejection_rate: uncond as f64 / replications as f64,
                replications,
                resamples: b,
            });
        }
    }
    Ok(RejectionTable { rows })
}

/// Power and Type I error study: for each ρ in the grid, repeatedly
/// generate a dataset, transform it with the `1.75·√(λ/n)` rule bandwidth,
/// and run the permutation test; a replication rejects when p ≤ 0.05. The
/// unconditional rate comes from the same statistic applied to the
/// empirical-CDF ranks of the raw responses, ignoring X. The ρ = 0 rows
/// are the Type I error rates.
///
/// Replications are independently seeded from `(base.seed, grid index,
/// replication index)`, so tables are reproducible under any parallelism.
pub fn run_power_study(
    base: &SimConfig,
    rho_grid: &[f64],
    replications: u64,
    b: u64,
    kinds: &[StatisticKind],
) -> Result<RejectionTable> {
    if rho_grid.is_empty() {
        return Err(Error::InvalidArgument("empty ρ grid".into()));
    }
    let points: Vec<StudyPoint> = rho_grid
        .iter()
        .enumerate()
        .map(|(gi, &rho)| StudyPoint {
            rho,
            bandwidth: None,
            tag: gi as u64,
        })
        .collect();
    run_study(base, &points, replications, b, kinds)
}

/// Type I error as a function of the transform bandwidth: the power study
/// restricted to ρ = 0, sweeping explicit bandwidths instead of the rule.
/// All bandwidths see the same simulated datasets (common random numbers),
/// so differences between rows isolate the bandwidth effect.
pub fn run_bandwidth_robustness(
    base: &SimConfig,
    bandwidth_grid: &[f64],
    replications: u64,
    b: u64,
    kinds: &[StatisticKind],
) -> Result<RejectionTable> {
    if bandwidth_grid.is_empty() {
        return Err(Error::InvalidArgument("empty bandwidth grid".into()));
    }
    let points: Vec<StudyPoint> = bandwidth_grid
        .iter()
        .map(|&h| {
            Ok(StudyPoint {
                rho: 0.0,
                bandwidth: Some(Bandwidth::new(h)?),
                tag: 0,
            })
        })
        .collect::<Result<_>>()?;
    run_study(base, &points, replications, b, kinds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn derived_seeds_are_distinct_and_stable() {
        let a = derive_seed(7, 0, 0);
        assert_eq!(a, derive_seed(7, 0, 0));
        assert_ne!(a, derive_seed(7, 0, 1));
        assert_ne!(a, derive_seed(7, 1, 0));
        assert_ne!(a, derive_seed(8, 0, 0));
    }

    #[test]
    fn path_starts_at_zero_for_any_seed() {
        for seed in [0, 1, 2, 99, u64::MAX] {
            let g = integrated_wiener(1.0, 50, seed).unwrap();
            assert_eq!(g.values()[0], 0.0);
            assert_eq!(g.eval(0.0), 0.0);
        }
    }

    #[test]
    fn zero_signal_scale_gives_the_zero_path() {
        let g = integrated_wiener(0.0, 200, 3).unwrap();
        assert!(g.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn eval_interpolates_linearly_and_clamps() {
        let g = SignalPath {
            values: vec![0.0, 1.0, 3.0],
        };
        assert_eq!(g.eval(0.0), 0.0);
        assert_eq!(g.eval(0.25), 0.5);
        assert_eq!(g.eval(0.5), 1.0);
        assert_relative_eq!(g.eval(0.75), 2.0);
        assert_eq!(g.eval(1.0), 3.0);
        assert_eq!(g.eval(-0.5), 0.0);
        assert_eq!(g.eval(1.5), 3.0);
    }

    #[test]
    fn terminal_variance_matches_the_integrated_wiener_law() {
        // Var[∫₀¹ W dt] = 1/3.
        let vals: Vec<f64> = (0..2000)
            .map(|i| integrated_wiener(1.0, 300, i).unwrap().eval(1.0))
            .collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
            / (vals.len() - 1) as f64;
        assert_abs_diff_eq!(var, 1.0 / 3.0, epsilon = 0.05);
    }

    #[test]
    fn datasets_are_deterministic_and_paths_are_independent_streams() {
        let cfg = SimConfig::new(40, 0.5, 0.3, 11);
        let (s1, g, h) = gen_dataset_with_truth(&cfg).unwrap();
        let (s2, _, _) = gen_dataset_with_truth(&cfg).unwrap();
        assert_eq!(s1, s2);
        assert_ne!(g, h);
    }

    #[test]
    fn perfectly_correlated_errors_coincide() {
        let cfg = SimConfig::new(60, 0.5, 1.0, 5);
        let (sample, g, h) = gen_dataset_with_truth(&cfg).unwrap();
        for i in 0..sample.n() {
            let ry = sample.ys()[i] - g.eval(sample.xs()[i]);
            let rz = sample.zs()[i] - h.eval(sample.xs()[i]);
            assert_relative_eq!(ry, rz, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn empirical_error_correlation_matches_rho() {
        let cfg = SimConfig::new(100_000, 0.5, 0.4, 9);
        let (sample, g, h) = gen_dataset_with_truth(&cfg).unwrap();
        let ey: Vec<f64> = sample
            .xs()
            .iter()
            .zip(sample.ys())
            .map(|(&x, &y)| y - g.eval(x))
            .collect();
        let ez: Vec<f64> = sample
            .xs()
            .iter()
            .zip(sample.zs())
            .map(|(&x, &z)| z - h.eval(x))
            .collect();
        let r = crate::stats::pearson_r(&ey, &ez).unwrap().value;
        assert_abs_diff_eq!(r, 0.4, epsilon = 0.01);
        // The recovered errors have the model scale σ_ε = λσ₀.
        let sd = (ey.iter().map(|e| e * e).sum::<f64>() / ey.len() as f64).sqrt();
        assert_abs_diff_eq!(sd, 0.5, epsilon = 0.01);
    }

    #[test]
    fn zero_lambda_is_invalid() {
        let cfg = SimConfig::new(50, 0.0, 0.0, 1);
        assert!(matches!(
            gen_dataset(&cfg),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn true_margins_are_probabilities_with_uniform_spread() {
        let cfg = SimConfig::new(5000, 0.5, 0.0, 21);
        let (sample, g, h) = gen_dataset_with_truth(&cfg).unwrap();
        let (us, vs) = true_pseudo_margins(&sample, &g, &h, cfg.sigma_eps()).unwrap();
        assert!(us.iter().chain(&vs).all(|p| (0.0..=1.0).contains(p)));
        let mean = us.iter().sum::<f64>() / us.len() as f64;
        assert_abs_diff_eq!(mean, 0.5, epsilon = 0.02);
        assert_eq!(std_normal_cdf(0.0), 0.5);
    }

    #[test]
    fn ecdf_ranks_use_weak_inequality() {
        assert_eq!(
            ecdf_ranks(&[3.0, 1.0, 2.0, 1.0]),
            vec![1.0, 0.5, 0.75, 0.5]
        );
    }

    #[test]
    fn zero_replications_invalid() {
        let base = SimConfig::new(20, 0.5, 0.0, 1);
        assert!(matches!(
            run_power_study(&base, &[0.0], 0, 10, &[StatisticKind::Pearson]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn power_study_rows_follow_grid_order_and_are_deterministic() {
        let base = SimConfig::new(25, 0.5, 0.0, 17);
        let kinds = [StatisticKind::Pearson, StatisticKind::Kendall];
        let t1 = run_power_study(&base, &[0.0, 0.8], 8, 40, &kinds).unwrap();
        let t2 = run_power_study(&base, &[0.0, 0.8], 8, 40, &kinds).unwrap();
        assert_eq!(t1, t2);
        assert_eq!(t1.rows.len(), 4);
        assert_eq!(
            t1.rows
                .iter()
                .map(|r| (r.rho, r.statistic.as_str()))
                .collect::<Vec<_>>(),
            vec![
                (0.0, "pearson"),
                (0.0, "kendall"),
                (0.8, "pearson"),
                (0.8, "kendall"),
            ]
        );
        let row = &t1.rows[0];
        assert_eq!(row.n, 25);
        assert_eq!(row.replications, 8);
        assert_eq!(row.resamples, 40);
        assert_relative_eq!(row.bandwidth, 1.75 * (0.5f64 / 25.0).sqrt());
        assert!(t1
            .rows
            .iter()
            .all(|r| (0.0..=1.0).contains(&r.conditional_rejection_rate)));
    }

    #[test]
    fn fixed_paths_change_the_study_but_stay_deterministic() {
        // Mid-power setting so the rates have enough resolution (grid 1/200)
        // that the fresh- and fixed-path pipelines cannot collide by chance.
        let fresh = SimConfig::new(20, 0.5, 0.35, 2);
        let fixed = fresh.with_fixed_paths();
        let a = run_power_study(&fresh, &[0.35], 200, 50, &[StatisticKind::Pearson]).unwrap();
        let b = run_power_study(&fixed, &[0.35], 200, 50, &[StatisticKind::Pearson]).unwrap();
        let b2 = run_power_study(&fixed, &[0.35], 200, 50, &[StatisticKind::Pearson]).unwrap();
        assert_eq!(b, b2);
        assert_eq!(a.rows.len(), b.rows.len());
        assert_ne!(a, b);
    }

    #[test]
    fn bandwidth_sweep_has_one_row_per_bandwidth_in_grid_order() {
        let base = SimConfig::new(25, 0.5, 0.9, 13);
        let grid = [0.05, 0.2, 0.8];
        let t = run_bandwidth_robustness(&base, &grid, 6, 40, &[StatisticKind::Pearson]).unwrap();
        assert_eq!(t.rows.len(), 3);
        for (row, &h) in t.rows.iter().zip(&grid) {
            assert_eq!(row.bandwidth, h);
            // The sweep tests the null regardless of the base ρ.
            assert_eq!(row.rho, 0.0);
        }
    }

    #[test]
    fn rejection_table_round_trips_through_csv() {
        let base = SimConfig::new(20, 0.5, 0.0, 3);
        let table = run_power_study(&base, &[0.5], 5, 30, &[StatisticKind::Kendall]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rates.csv");
        table.write_csv(&path).unwrap();
        let mut reader = csv::Reader::from_path(&path).unwrap();
        let rows: Vec<RejectionRow> = reader
            .deserialize()
            .collect::<std::result::Result<_, _>>()
            .unwrap();
        assert_eq!(rows, table.rows);
    }
}
