//! The partial copula transform.
//!
//! Each observation `(xᵢ, yᵢ, zᵢ)` is mapped to the pseudo-observation
//! `(ûᵢ, v̂ᵢ) = (F̂(yᵢ | xᵢ), F̂(zᵢ | xᵢ))` using the kernel-weighted
//! conditional CDF estimates of [`crate::kernel`]. When the true conditional
//! CDFs are continuous, `U = F(Y|X)` and `V = F(Z|X)` are each uniform on
//! `(0, 1)` and independent of `X`, and `Y ⫫ Z | X` holds exactly when `U`
//! and `V` are independent — so any ordinary independence test applied to
//! the pseudo-observations becomes a test of conditional independence.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::data::Sample;
use crate::error::{Error, Result};
use crate::kernel::{Bandwidth, BandwidthRule, EstimatorConfig, Kernel};

/// See [`crate::kernel`]: weight sums below this are treated as degenerate.
const WEIGHT_SUM_FLOOR: f64 = 1e-300;

/// The estimator configuration actually used for a transform, with the
/// bandwidth rule resolved to concrete per-margin values. Echoed in every
/// downstream report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResolvedConfig {
    pub kernel: Kernel,
    #[serde(flatten)]
    pub rule: BandwidthRule,
    pub h_y: Bandwidth,
    pub h_z: Bandwidth,
    pub leave_one_out: bool,
}

/// Pseudo-observations `(ûᵢ, v̂ᵢ)`, in the row order of the source sample.
///
/// With in-sample evaluation every value lies in `(0, 1]`: the self term
/// keeps the numerator strictly positive, and rows carrying the local
/// maximum response map to exactly 1. Under the leave-one-out option values
/// may reach 0.
#[derive(Clone, Debug, PartialEq)]
pub struct PseudoSample {
    us: Vec<f64>,
    vs: Vec<f64>,
    config: ResolvedConfig,
}

impl PseudoSample {
    #[inline]
    pub fn n(&self) -> usize {
        self.us.len()
    }

    #[inline]
    pub fn us(&self) -> &[f64] {
        &self.us
    }

    #[inline]
    pub fn vs(&self) -> &[f64] {
        &self.vs
    }

    pub fn config(&self) -> &ResolvedConfig {
        &self.config
    }

    /// Assemble a pseudo-sample from already-transformed margins. Used by
    /// the simulation harness where the true conditional CDFs are known in
    /// closed form; library callers normally go through
    /// [`partial_copula_transform`].
    pub fn from_margins(us: Vec<f64>, vs: Vec<f64>, config: ResolvedConfig) -> Result<Self> {
        if us.is_empty() || us.len() != vs.len() {
            return Err(Error::InvalidArgument(format!(
                "pseudo-sample margins must be nonempty and equal length, got {} and {}",
                us.len(),
                vs.len()
            )));
        }
        if us
            .iter()
            .chain(vs.iter())
            .any(|p| !p.is_finite() || !(0.0..=1.0).contains(p))
        {
            return Err(Error::InvalidArgument(
                "pseudo-observations must lie in [0, 1]".into(),
            ));
        }
        Ok(PseudoSample { us, vs, config })
    }
}

/// Transform a sample to pseudo-observations.
///
/// Both margins are estimated at the data points themselves; observation
/// `i` is included in its own weight sums unless `config.leave_one_out` is
/// set. A weight-sum underflow is reported with the offending 1-based row.
pub fn partial_copula_transform(
    sample: &Sample,
    config: &EstimatorConfig,
) -> Result<PseudoSample> {
    let n = sample.n();
    let (h_y, h_z) = config.resolve(sample.xs())?;
    let (xs, ys, zs) = (sample.xs(), sample.ys(), sample.zs());
    let same_h = h_y == h_z;

    let mut us = Vec::with_capacity(n);
    let mut vs = Vec::with_capacity(n);
    for i in 0..n {
        let (mut num_u, mut den_u) = (0.0, 0.0);
        let (mut num_v, mut den_v) = (0.0, 0.0);
        for j in 0..n {
            if config.leave_one_out && j == i {
                continue;
            }
            let d = (xs[i] - xs[j]).abs();
            let wy = config.kernel.weight(d / h_y.value());
            let wz = if same_h {
                wy
            } else {
                config.kernel.weight(d / h_z.value())
            };
            den_u += wy;
            if ys[j] <= ys[i] {
                num_u += wy;
            }
            den_v += wz;
            if zs[j] <= zs[i] {
                num_v += wz;
            }
        }
        if den_u < WEIGHT_SUM_FLOOR || den_v < WEIGHT_SUM_FLOOR {
            return Err(Error::DegenerateWeights { row: Some(i + 1) });
        }
        us.push((num_u / den_u).clamp(0.0, 1.0));
        vs.push((num_v / den_v).clamp(0.0, 1.0));
    }

    Ok(PseudoSample {
        us,
        vs,
        config: ResolvedConfig {
            kernel: config.kernel,
            rule: config.rule,
            h_y,
            h_z,
            leave_one_out: config.leave_one_out,
        },
    })
}

/// Kolmogorov-Smirnov sup-distance between the empirical CDF of `values`
/// and the Uniform(0, 1) CDF.
///
/// A diagnostic for how uniform a transformed margin came out; it is
/// reported but never gates the test pipeline.
pub fn uniformity_diagnostic(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidArgument(
            "uniformity diagnostic needs at least one value".into(),
        ));
    }
    if values.iter().any(|v| !v.is_finite() || !(0.0..=1.0).contains(v)) {
        return Err(Error::InvalidArgument(
            "uniformity diagnostic expects values in [0, 1]".into(),
        ));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        d = d.max(v - i as f64 / n).max((i + 1) as f64 / n - v);
    }
    Ok(d)
}

/// Write `(x, u, v)` rows as CSV — the underlying data of the transform's
/// diagnostic scatter plots.
pub fn write_pseudo_csv(path: &Path, sample: &Sample, pseudo: &PseudoSample) -> Result<()> {
    let out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_pseudo_csv_to(out, sample, pseudo)
}

/// Same rows as [`write_pseudo_csv`] but to any writer, e.g. stdout.
pub fn write_pseudo_csv_to<W: Write>(
    mut out: W,
    sample: &Sample,
    pseudo: &PseudoSample,
) -> Result<()> {
    if sample.n() != pseudo.n() {
        return Err(Error::InvalidArgument(format!(
            "sample has {} rows but pseudo-sample has {}",
            sample.n(),
            pseudo.n()
        )));
    }
    writeln!(out, "x,u,v")?;
    for i in 0..sample.n() {
        writeln!(out, "{},{},{}", sample.xs()[i], pseudo.us()[i], pseudo.vs()[i])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::digoxin_dataset;
    use crate::kernel::nw_conditional_cdf;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn single_row_maps_to_unit_corner() {
        let s = Sample::from_rows(&[(5.0, -3.0, 9.0)]).unwrap();
        let p = partial_copula_transform(
            &s,
            &EstimatorConfig::explicit(Bandwidth::new(1.0).unwrap()),
        )
        .unwrap();
        assert_eq!(p.us(), &[1.0]);
        assert_eq!(p.vs(), &[1.0]);
    }

    #[test]
    fn flat_weight_limit_is_ecdf_rank() {
        let s = Sample::from_rows(&[
            (0.0, 3.0, 1.0),
            (1.0, 1.0, 2.0),
            (2.0, 2.0, 0.5),
            (3.0, 4.0, 0.7),
        ])
        .unwrap();
        let p = partial_copula_transform(
            &s,
            &EstimatorConfig::explicit(Bandwidth::new(1e12).unwrap()),
        )
        .unwrap();
        for i in 0..s.n() {
            let rank_u =
                s.ys().iter().filter(|&&y| y <= s.ys()[i]).count() as f64 / s.n() as f64;
            let rank_v =
                s.zs().iter().filter(|&&z| z <= s.zs()[i]).count() as f64 / s.n() as f64;
            assert_relative_eq!(p.us()[i], rank_u, epsilon = 1e-9);
            assert_relative_eq!(p.vs()[i], rank_v, epsilon = 1e-9);
        }
    }

    #[test]
    fn digoxin_first_row_golden_values() {
        // Golden values from an independently coded direct evaluation of
        // the estimator, recorded before this implementation was written.
        let d = digoxin_dataset();
        let silverman =
            partial_copula_transform(&d, &EstimatorConfig::silverman()).unwrap();
        assert_relative_eq!(silverman.us()[0], 0.2597314391616687, epsilon = 1e-12);
        assert_relative_eq!(silverman.vs()[0], 0.44891298697177795, epsilon = 1e-12);

        let fixed = partial_copula_transform(
            &d,
            &EstimatorConfig::explicit(Bandwidth::new(22.48).unwrap()),
        )
        .unwrap();
        assert_relative_eq!(fixed.us()[0], 0.25970238043671334, epsilon = 1e-12);
        assert_relative_eq!(fixed.vs()[0], 0.4489046151818485, epsilon = 1e-12);
    }

    #[test]
    fn matches_direct_conditional_cdf_calls() {
        let d = digoxin_dataset();
        let cfg = EstimatorConfig::silverman();
        let p = partial_copula_transform(&d, &cfg).unwrap();
        let (h_y, h_z) = cfg.resolve(d.xs()).unwrap();
        let xy: Vec<(f64, f64)> = d.xs().iter().copied().zip(d.ys().iter().copied()).collect();
        let xz: Vec<(f64, f64)> = d.xs().iter().copied().zip(d.zs().iter().copied()).collect();
        for i in 0..d.n() {
            let u = nw_conditional_cdf(&xy, cfg.kernel, h_y, (d.xs()[i], d.ys()[i])).unwrap();
            let v = nw_conditional_cdf(&xz, cfg.kernel, h_z, (d.xs()[i], d.zs()[i])).unwrap();
            assert_eq!(p.us()[i], u);
            assert_eq!(p.vs()[i], v);
        }
    }

    #[test]
    fn values_in_unit_interval_and_max_row_is_one() {
        let d = digoxin_dataset();
        let p = partial_copula_transform(&d, &EstimatorConfig::silverman()).unwrap();
        for &u in p.us().iter().chain(p.vs()) {
            assert!(u > 0.0 && u <= 1.0);
        }
        // The row holding the largest y dominates every indicator.
        let argmax = d
            .ys()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(p.us()[argmax], 1.0);
    }

    #[test]
    fn leave_one_out_annotates_offending_row() {
        // Row 3 sits so far from the rest that with a tiny bandwidth all
        // its cross weights underflow once the self term is excluded.
        let s = Sample::from_rows(&[
            (0.0, 1.0, 1.0),
            (0.1, 2.0, 2.0),
            (1e6, 3.0, 3.0),
        ])
        .unwrap();
        let cfg = EstimatorConfig::explicit(Bandwidth::new(0.01).unwrap())
            .with_leave_one_out(true);
        match partial_copula_transform(&s, &cfg) {
            Err(Error::DegenerateWeights { row: Some(3) }) => {}
            other => panic!("expected degenerate weights at row 3, got {other:?}"),
        }
    }

    #[test]
    fn in_sample_never_degenerates() {
        // The self weight K(0) bounds every denominator away from zero.
        let s = Sample::from_rows(&[
            (0.0, 1.0, 1.0),
            (0.1, 2.0, 2.0),
            (1e6, 3.0, 3.0),
        ])
        .unwrap();
        let cfg = EstimatorConfig::explicit(Bandwidth::new(0.01).unwrap());
        let p = partial_copula_transform(&s, &cfg).unwrap();
        assert_eq!(p.us()[2], 1.0);
    }

    #[test]
    fn ks_distance_examples() {
        assert_relative_eq!(uniformity_diagnostic(&[0.5]).unwrap(), 0.5);
        assert_relative_eq!(uniformity_diagnostic(&[0.25, 0.75]).unwrap(), 0.25);
        assert!(matches!(
            uniformity_diagnostic(&[]),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn pseudo_csv_round_trip_columns() {
        let d = digoxin_dataset();
        let p = partial_copula_transform(&d, &EstimatorConfig::silverman()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pseudo.csv");
        write_pseudo_csv(&path, &d, &p).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,u,v"));
        assert_eq!(lines.count(), 35);
    }

    proptest! {
        // Strictly increasing response maps leave the transform unchanged:
        // the weights depend only on x and the indicators only on order.
        #[test]
        fn monotone_invariance_in_y(
            rows in proptest::collection::vec(
                (-50.0f64..50.0, -50.0f64..50.0, -50.0f64..50.0), 1..15),
        ) {
            let s = Sample::from_rows(&rows).unwrap();
            let mapped = Sample::from_rows(
                &rows.iter().map(|&(x, y, z)| (x, y.exp(), z)).collect::<Vec<_>>(),
            ).unwrap();
            let cfg = EstimatorConfig::explicit(Bandwidth::new(10.0).unwrap());
            let p0 = partial_copula_transform(&s, &cfg).unwrap();
            let p1 = partial_copula_transform(&mapped, &cfg).unwrap();
            prop_assert_eq!(p0.us(), p1.us());
            prop_assert_eq!(p0.vs(), p1.vs());
        }
    }
}
