//! Permutation tests of independence on pseudo-observations.
//!
//! Under the null of conditional independence the pseudo-observations
//! `(û, v̂)` are (asymptotically) an i.i.d. sample from independent
//! uniforms, so permuting one margin leaves their joint distribution
//! unchanged. The test recomputes the chosen association statistic with
//! `v̂` reordered uniformly at random while `û` stays fixed, and reports
//! where the observed statistic falls in that resampling distribution.
//!
//! Reproducibility contract: every resample draws from its own
//! [`ChaCha8Rng`] stream derived from `(seed, resample index)`, so a
//! result is bit-identical for a given seed regardless of thread count
//! or scheduling.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::evaluator::{CustomStatistic, Evaluator};
use crate::stats::{Sidedness, StatisticSpec};
use crate::transform::{PseudoSample, ResolvedConfig};

/// Largest `n!` the exhaustive mode will enumerate (10!). Past this the
/// Monte Carlo mode is both faster and statistically indistinguishable.
pub const EXHAUSTIVE_BUDGET: u128 = 3_628_800;

/// How the permutation distribution is explored.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PermutationMode {
    /// `B` uniform random permutations, p = (1 + #exceedances)/(B + 1).
    MonteCarlo,
    /// All `n!` permutations (identity included), p = #exceedances/n!.
    Exhaustive,
}

impl std::fmt::Display for PermutationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PermutationMode::MonteCarlo => "monte_carlo",
            PermutationMode::Exhaustive => "exhaustive",
        })
    }
}

/// Outcome of one permutation test, carrying everything needed to rerun it.
#[derive(Clone, Debug, Serialize)]
pub struct TestResult {
    pub statistic: String,
    pub sidedness: Sidedness,
    pub observed: f64,
    pub p_value: f64,
    pub resamples: u64,
    pub mode: PermutationMode,
    pub seed: u64,
    pub n: usize,
    pub config_echo: ResolvedConfig,
}

/// The bare test outputs, for callers that manage their own reporting
/// (the simulation study's unconditional comparisons, in particular).
#[derive(Clone, Copy, Debug)]
pub(crate) struct RawTest {
    pub observed: f64,
    pub p_value: f64,
    pub resamples: u64,
}

fn exceeds(t: f64, t0: f64, sidedness: Sidedness) -> bool {
    match sidedness {
        Sidedness::TwoSided => t.abs() >= t0.abs(),
        Sidedness::Upper => t >= t0,
    }
}

/// Lexicographic successor in place; false once `p` is the last permutation.
fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

fn factorial_checked(n: usize) -> Option<u128> {
    let mut acc: u128 = 1;
    for k in 2..=n as u128 {
        acc = acc.checked_mul(k)?;
    }
    Some(acc)
}

fn run(evaluator: &Evaluator, n: usize, sidedness: Sidedness, b: u64, seed: u64, mode: PermutationMode) -> Result<RawTest> {
    let observed = evaluator.observed();
    match mode {
        PermutationMode::MonteCarlo => {
            if b == 0 {
                return Err(Error::InvalidArgument(
                    "monte_carlo mode needs at least one resample".into(),
                ));
            }
            let exceed: u64 = (0..b)
                .into_par_iter()
                .map(|idx| {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream(idx + 1);
                    let mut pi: Vec<usize> = (0..n).collect();
                    pi.shuffle(&mut rng);
                    exceeds(evaluator.eval_permuted(&pi), observed, sidedness) as u64
                })
                .sum();
            Ok(RawTest {
                observed,
                p_value: (1 + exceed) as f64 / (b + 1) as f64,
                resamples: b,
            })
        }
        PermutationMode::Exhaustive => {
            let total = factorial_checked(n).filter(|&t| t <= EXHAUSTIVE_BUDGET).ok_or(
                Error::BudgetExceeded {
                    required: factorial_checked(n).unwrap_or(u128::MAX),
                    budget: EXHAUSTIVE_BUDGET,
                },
            )?;
            let mut pi: Vec<usize> = (0..n).collect();
            let mut exceed: u64 = 0;
            loop {
                exceed += exceeds(evaluator.eval_permuted(&pi), observed, sidedness) as u64;
                if !next_permutation(&mut pi) {
                    break;
                }
            }
            Ok(RawTest {
                observed,
                p_value: exceed as f64 / total as f64,
                resamples: total as u64,
            })
        }
    }
}

/// Test independence of the pseudo-observation margins.
///
/// The observed statistic is computed on `(û, v̂)` as given; each resample
/// permutes `v̂` uniformly at random with `û` fixed. Two-sided specs count
/// `|T_b| ≥ |T₀|` as exceedance, upper-tailed specs `T_b ≥ T₀`. Both modes
/// count the identity-equivalent outcome (the `+1` smoothing term in Monte
/// Carlo, the identity permutation itself in exhaustive mode), so the
/// p-value is never zero.
///
/// A degenerate margin (zero variance under `pearson`) is an error rather
/// than a fabricated p-value; `kendall` and the upper-tailed statistics
/// handle constant margins naturally through `sign(0) = 0`.
pub fn permutation_pvalue(
    pseudo: &PseudoSample,
    spec: StatisticSpec,
    b: u64,
    seed: u64,
    mode: PermutationMode,
) -> Result<TestResult> {
    let n = pseudo.n();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "permutation test needs at least 2 observations, got {n}"
        )));
    }
    let evaluator = Evaluator::for_kind(spec.kind, pseudo.us(), pseudo.vs())?;
    let raw = run(&evaluator, n, spec.sidedness, b, seed, mode)?;
    Ok(TestResult {
        statistic: spec.kind.name().to_owned(),
        sidedness: spec.sidedness,
        observed: raw.observed,
        p_value: raw.p_value,
        resamples: raw.resamples,
        mode,
        seed,
        n,
        config_echo: *pseudo.config(),
    })
}

/// [`permutation_pvalue`] for a user-supplied V-statistic kernel pair.
///
/// Custom statistics are evaluated by brute-force enumeration of all
/// `n^r` tuples per resample, so they are only practical for small `n`
/// and modest `B`; the tuple budget is checked once up front.
pub fn permutation_pvalue_custom(
    pseudo: &PseudoSample,
    custom: CustomStatistic,
    sidedness: Sidedness,
    b: u64,
    seed: u64,
    mode: PermutationMode,
) -> Result<TestResult> {
    let n = pseudo.n();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "permutation test needs at least 2 observations, got {n}"
        )));
    }
    let name = custom.name.clone();
    let evaluator = Evaluator::for_custom(custom, pseudo.us(), pseudo.vs())?;
    let raw = run(&evaluator, n, sidedness, b, seed, mode)?;
    Ok(TestResult {
        statistic: name,
        sidedness,
        observed: raw.observed,
        p_value: raw.p_value,
        resamples: raw.resamples,
        mode,
        seed,
        n,
        config_echo: *pseudo.config(),
    })
}

/// Permutation test on margins that did not come out of the transform
/// (the simulation study's unconditional rank tests).
pub(crate) fn permutation_pvalue_raw(
    us: &[f64],
    vs: &[f64],
    spec: StatisticSpec,
    b: u64,
    seed: u64,
    mode: PermutationMode,
) -> Result<RawTest> {
    if us.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "permutation test needs at least 2 observations, got {}",
            us.len()
        )));
    }
    let evaluator = Evaluator::for_kind(spec.kind, us, vs)?;
    run(&evaluator, us.len(), spec.sidedness, b, seed, mode)
}
