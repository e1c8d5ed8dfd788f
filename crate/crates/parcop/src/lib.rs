//! Nonparametric tests of conditional independence via the partial copula.
//!
//! Given observations `(Xᵢ, Yᵢ, Zᵢ)`, the question "is Y independent of Z
//! once X is known?" is reduced to an ordinary independence test in three
//! steps:
//!
//! 1. estimate the conditional CDFs `F(y|x)` and `F(z|x)` by kernel
//!    weighting ([`kernel`]),
//! 2. map each observation to the pseudo-observation
//!    `(ûᵢ, v̂ᵢ) = (F̂(yᵢ|xᵢ), F̂(zᵢ|xᵢ))` — the partial copula transform
//!    ([`transform`]),
//! 3. test `û ⫫ v̂` with a rank/V-statistic association measure under a
//!    permutation null ([`stats`], [`perm`]).
//!
//! The crate ships five statistics (`pearson`, `kendall`,
//! `hoeffding_delta`, `kappa`, `tau_star`), a brute-force V-statistic
//! oracle against which the fast paths are verified, a simulation harness
//! for power and Type I error studies ([`sim`]), reporting helpers
//! ([`report`]), and the digoxin renal-clearance dataset as a worked
//! example ([`data`]).
//!
//! ```
//! use parcop::data::digoxin_dataset;
//! use parcop::kernel::EstimatorConfig;
//! use parcop::perm::{permutation_pvalue, PermutationMode};
//! use parcop::stats::{StatisticKind, StatisticSpec};
//! use parcop::transform::partial_copula_transform;
//!
//! let sample = digoxin_dataset();
//! let pseudo = partial_copula_transform(&sample, &EstimatorConfig::silverman())?;
//! let result = permutation_pvalue(
//!     &pseudo,
//!     StatisticSpec::of(StatisticKind::Kendall),
//!     999,
//!     7,
//!     PermutationMode::MonteCarlo,
//! )?;
//! assert!(result.p_value < 0.05);
//! # Ok::<(), parcop::error::Error>(())
//! ```

pub mod data;
pub mod error;
pub mod kernel;
pub mod perm;
pub mod report;
pub mod sim;
pub mod stats;
pub mod transform;

pub use data::{digoxin_dataset, Sample};
pub use error::{Error, Result};
pub use kernel::{silverman_bandwidth, sim_bandwidth, Bandwidth, BandwidthRule, EstimatorConfig};
pub use perm::{permutation_pvalue, PermutationMode, TestResult};
pub use stats::{Sidedness, StatisticKind, StatisticSpec};
pub use transform::{partial_copula_transform, PseudoSample, ResolvedConfig};
