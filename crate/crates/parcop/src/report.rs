//! Run reports: the transform → test pipeline with its serializable
//! summary, plus the sidedness/estimation sensitivity report.
//!
//! A [`RunReport`] is deterministic given its inputs — the JSON
//! serialization of two runs with identical data, configuration, and seed
//! is byte-identical. Wall-clock timings are therefore kept out of the
//! serialized form; they appear only in the human-readable table.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use crate::data::Sample;
use crate::error::{Error, Result};
use crate::kernel::EstimatorConfig;
use crate::perm::{permutation_pvalue, PermutationMode, TestResult};
use crate::sim::derive_seed;
use crate::stats::{Sidedness, StatisticKind, StatisticSpec};
use crate::transform::{partial_copula_transform, uniformity_diagnostic};

/// Kolmogorov-Smirnov distances of the pseudo-observation margins from
/// Uniform(0,1). Large values flag a failing transform (undersmoothing,
/// discrete responses) before any p-value is interpreted.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub ks_u: f64,
    pub ks_v: f64,
}

/// Everything one pipeline run produced. Serializes to JSON with a stable
/// field order; `timings` is excluded so reports are byte-reproducible.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    /// Where the data came from ("digoxin", a file path, "simulated", …).
    pub data: String,
    pub n: usize,
    pub config: crate::transform::ResolvedConfig,
    pub diagnostics: Diagnostics,
    pub results: Vec<TestResult>,
    /// Seconds spent per stage, in execution order. Not serialized.
    #[serde(skip)]
    pub timings: Vec<(String, f64)>,
}

/// Tag base for per-statistic seed derivation; the offset within
/// [`StatisticKind::ALL`] makes each statistic's permutation stream
/// independent of which other statistics were requested alongside it.
fn statistic_tag(kind: StatisticKind) -> u64 {
    1000 + StatisticKind::ALL
        .iter()
        .position(|&k| k == kind)
        .expect("every kind appears in ALL") as u64
}

fn resolve_sidedness(kind: StatisticKind, overridden: Option<Sidedness>) -> Sidedness {
    overridden.unwrap_or_else(|| kind.default_sidedness())
}

/// Transform the sample and run one permutation test per requested
/// statistic.
///
/// Each statistic draws its permutations from a seed derived from
/// `(seed, statistic)`, so a statistic's p-value does not depend on what
/// else was requested. `sided_override` replaces the per-statistic default
/// sidedness for every test when given.
#[allow(clippy::too_many_arguments)]
pub fn run_test_pipeline(
    data_label: &str,
    sample: &Sample,
    config: &EstimatorConfig,
    kinds: &[StatisticKind],
    sided_override: Option<Sidedness>,
    resamples: u64,
    seed: u64,
    mode: PermutationMode,
) -> Result<RunReport> {
    if kinds.is_empty() {
        return Err(Error::InvalidArgument(
            "no statistics requested".into(),
        ));
    }
    for (i, kind) in kinds.iter().enumerate() {
        if kinds[..i].contains(kind) {
            return Err(Error::InvalidArgument(format!(
                "statistic {kind} requested more than once"
            )));
        }
    }

    let mut timings = Vec::with_capacity(kinds.len() + 1);
    let start = Instant::now();
    let pseudo = partial_copula_transform(sample, config)?;
    timings.push(("transform".to_owned(), start.elapsed().as_secs_f64()));

    let diagnostics = Diagnostics {
        ks_u: uniformity_diagnostic(pseudo.us())?,
        ks_v: uniformity_diagnostic(pseudo.vs())?,
    };

    let mut results = Vec::with_capacity(kinds.len());
    for &kind in kinds {
        let spec = StatisticSpec::of(kind)
            .with_sidedness(resolve_sidedness(kind, sided_override));
        let start = Instant::now();
        let result = permutation_pvalue(
            &pseudo,
            spec,
            resamples,
            derive_seed(seed, statistic_tag(kind), 0),
            mode,
        )?;
        timings.push((kind.name().to_owned(), start.elapsed().as_secs_f64()));
        results.push(result);
    }

    Ok(RunReport {
        data: data_label.to_owned(),
        n: sample.n(),
        config: *pseudo.config(),
        diagnostics,
        results,
        timings,
    })
}

/// The report as pretty-printed JSON with a trailing newline. Byte-identical
/// across runs with the same inputs.
pub fn report_json(report: &RunReport) -> Result<String> {
    let mut out = serde_json::to_string_pretty(report)
        .map_err(|e| Error::InvalidArgument(format!("report serialization failed: {e}")))?;
    out.push('\n');
    Ok(out)
}

pub fn write_report_json(path: &Path, report: &RunReport) -> Result<()> {
    std::fs::write(path, report_json(report)?)?;
    Ok(())
}

/// One row per test: `statistic,sidedness,observed,p_value,resamples,mode,
/// seed,n`. Floats are written in shortest round-trip form.
pub fn write_results_csv(path: &Path, report: &RunReport) -> Result<()> {
    let out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_results_csv_to(out, report)
}

/// Same rows as [`write_results_csv`] but to any writer, e.g. stdout.
pub fn write_results_csv_to<W: std::io::Write>(out: W, report: &RunReport) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record([
        "statistic",
        "sidedness",
        "observed",
        "p_value",
        "resamples",
        "mode",
        "seed",
        "n",
    ])?;
    for r in &report.results {
        writer.write_record([
            r.statistic.clone(),
            r.sidedness.to_string(),
            r.observed.to_string(),
            r.p_value.to_string(),
            r.resamples.to_string(),
            r.mode.to_string(),
            r.seed.to_string(),
            r.n.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Human-readable summary, timings included.
pub fn render_table(report: &RunReport) -> String {
    let mut out = String::new();
    let c = &report.config;
    let _ = writeln!(out, "data: {} (n = {})", report.data, report.n);
    let _ = writeln!(
        out,
        "kernel: {:?}, h_y = {}, h_z = {}, leave-one-out: {}",
        c.kernel,
        c.h_y.value(),
        c.h_z.value(),
        c.leave_one_out
    );
    let _ = writeln!(
        out,
        "KS distance from uniform: u = {:.4}, v = {:.4}",
        report.diagnostics.ks_u, report.diagnostics.ks_v
    );
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "{:<16} {:>10} {:>12} {:>10} {:>10}  {:<12} {:>8}",
        "statistic", "sidedness", "observed", "p-value", "resamples", "mode", "time"
    );
    for r in &report.results {
        let time = report
            .timings
            .iter()
            .find(|(name, _)| *name == r.statistic)
            .map(|(_, secs)| format!("{secs:.2}s"))
            .unwrap_or_default();
        let _ = writeln!(
            out,
            "{:<16} {:>10} {:>12.6} {:>10.5} {:>10}  {:<12} {:>8}",
            r.statistic,
            r.sidedness.to_string(),
            r.observed,
            r.p_value,
            r.resamples,
            r.mode.to_string(),
            time
        );
    }
    if let Some((_, secs)) = report.timings.iter().find(|(name, _)| name == "transform") {
        let _ = writeln!(out, "\ntransform time: {secs:.3}s");
    }
    out
}

/// One cell of the sensitivity grid: a statistic tested under one
/// sidedness and one estimation variant.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub statistic: String,
    pub sidedness: Sidedness,
    /// `in_sample` or `leave_one_out`.
    pub estimation: String,
    pub observed: f64,
    pub p_value: f64,
}

/// Rerun every requested statistic across the full sidedness × estimation
/// grid ({two_sided, upper} × {in-sample, leave-one-out}), with the same
/// derived seeds as [`run_test_pipeline`] so the default cell reproduces
/// the headline result exactly. This quantifies how much a conclusion
/// depends on the two conventions the method itself does not fix.
pub fn sensitivity_report(
    sample: &Sample,
    config: &EstimatorConfig,
    kinds: &[StatisticKind],
    resamples: u64,
    seed: u64,
    mode: PermutationMode,
) -> Result<Vec<SensitivityRow>> {
    let mut rows = Vec::with_capacity(kinds.len() * 4);
    for loo in [false, true] {
        let variant = config.with_leave_one_out(loo);
        let pseudo = partial_copula_transform(sample, &variant)?;
        for &kind in kinds {
            for sidedness in [Sidedness::TwoSided, Sidedness::Upper] {
                let spec = StatisticSpec::of(kind).with_sidedness(sidedness);
                let result = permutation_pvalue(
                    &pseudo,
                    spec,
                    resamples,
                    derive_seed(seed, statistic_tag(kind), 0),
                    mode,
                )?;
                rows.push(SensitivityRow {
                    statistic: kind.name().to_owned(),
                    sidedness,
                    estimation: if loo { "leave_one_out" } else { "in_sample" }.to_owned(),
                    observed: result.observed,
                    p_value: result.p_value,
                });
            }
        }
    }
    Ok(rows)
}

/// `statistic,sidedness,estimation,observed,p_value`, floats in shortest
/// round-trip form.
pub fn write_sensitivity_csv(path: &Path, rows: &[SensitivityRow]) -> Result<()> {
    let out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_sensitivity_csv_to(out, rows)
}

/// Same rows as [`write_sensitivity_csv`] but to any writer, e.g. stdout.
pub fn write_sensitivity_csv_to<W: std::io::Write>(out: W, rows: &[SensitivityRow]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["statistic", "sidedness", "estimation", "observed", "p_value"])?;
    for row in rows {
        writer.write_record([
            row.statistic.clone(),
            row.sidedness.to_string(),
            row.estimation.clone(),
            row.observed.to_string(),
            row.p_value.to_string(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

/// Render sensitivity rows as an aligned text table.
pub fn render_sensitivity(rows: &[SensitivityRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:>10} {:<14} {:>12} {:>10}",
        "statistic", "sidedness", "estimation", "observed", "p-value"
    );
    for row in rows {
        let _ = writeln!(
            out,
            "{:<16} {:>10} {:<14} {:>12.6} {:>10.5}",
            row.statistic,
            row.sidedness.to_string(),
            row.estimation,
            row.observed,
            row.p_value
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::digoxin_dataset;
    use approx::assert_relative_eq;

    fn quick_report() -> RunReport {
        run_test_pipeline(
            "digoxin",
            &digoxin_dataset(),
            &EstimatorConfig::silverman(),
            &[StatisticKind::Pearson, StatisticKind::Kendall],
            None,
            200,
            42,
            PermutationMode::MonteCarlo,
        )
        .unwrap()
    }

    #[test]
    fn pipeline_produces_one_result_per_statistic_in_order() {
        let report = quick_report();
        assert_eq!(report.n, 35);
        assert_eq!(
            report.results.iter().map(|r| r.statistic.as_str()).collect::<Vec<_>>(),
            vec!["pearson", "kendall"]
        );
        assert_eq!(report.results[0].sidedness, Sidedness::TwoSided);
        assert!(report.timings.len() >= 3);
    }

    #[test]
    fn duplicate_statistics_are_rejected() {
        let err = run_test_pipeline(
            "digoxin",
            &digoxin_dataset(),
            &EstimatorConfig::silverman(),
            &[StatisticKind::Pearson, StatisticKind::Pearson],
            None,
            50,
            0,
            PermutationMode::MonteCarlo,
        );
        assert!(matches!(err, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn json_reports_are_byte_identical_across_runs() {
        let a = report_json(&quick_report()).unwrap();
        let b = report_json(&quick_report()).unwrap();
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
        // Timings vary run to run; they must never reach the JSON.
        assert!(!a.contains("timing"));
    }

    #[test]
    fn per_statistic_seeds_do_not_depend_on_the_request_set() {
        let full = quick_report();
        let solo = run_test_pipeline(
            "digoxin",
            &digoxin_dataset(),
            &EstimatorConfig::silverman(),
            &[StatisticKind::Kendall],
            None,
            200,
            42,
            PermutationMode::MonteCarlo,
        )
        .unwrap();
        assert_eq!(full.results[1].p_value, solo.results[0].p_value);
    }

    #[test]
    fn sidedness_override_applies_to_all_results() {
        let report = run_test_pipeline(
            "digoxin",
            &digoxin_dataset(),
            &EstimatorConfig::silverman(),
            &[StatisticKind::Pearson, StatisticKind::Kappa],
            Some(Sidedness::Upper),
            50,
            1,
            PermutationMode::MonteCarlo,
        )
        .unwrap();
        assert!(report.results.iter().all(|r| r.sidedness == Sidedness::Upper));
    }

    #[test]
    fn sensitivity_grid_covers_all_combinations_and_matches_headline() {
        let sample = digoxin_dataset();
        let config = EstimatorConfig::silverman();
        let kinds = [StatisticKind::Kendall];
        let rows =
            sensitivity_report(&sample, &config, &kinds, 300, 9, PermutationMode::MonteCarlo)
                .unwrap();
        assert_eq!(rows.len(), 4);
        let headline = run_test_pipeline(
            "digoxin",
            &sample,
            &config,
            &kinds,
            None,
            300,
            9,
            PermutationMode::MonteCarlo,
        )
        .unwrap();
        let default_cell = rows
            .iter()
            .find(|r| r.sidedness == Sidedness::TwoSided && r.estimation == "in_sample")
            .unwrap();
        assert_eq!(default_cell.p_value, headline.results[0].p_value);
        assert_relative_eq!(default_cell.observed, headline.results[0].observed);
    }

    #[test]
    fn csv_writers_emit_documented_headers() {
        let report = quick_report();
        let dir = tempfile::tempdir().unwrap();
        let results_path = dir.path().join("results.csv");
        write_results_csv(&results_path, &report).unwrap();
        let contents = std::fs::read_to_string(&results_path).unwrap();
        assert!(contents.starts_with("statistic,sidedness,observed,p_value,resamples,mode,seed,n\n"));

        let rows = sensitivity_report(
            &digoxin_dataset(),
            &EstimatorConfig::silverman(),
            &[StatisticKind::Pearson],
            50,
            0,
            PermutationMode::MonteCarlo,
        )
        .unwrap();
        let sens_path = dir.path().join("sensitivity.csv");
        write_sensitivity_csv(&sens_path, &rows).unwrap();
        let contents = std::fs::read_to_string(&sens_path).unwrap();
        assert!(contents.starts_with("statistic,sidedness,estimation,observed,p_value\n"));
        assert_eq!(contents.lines().count(), 5);
    }

    #[test]
    fn table_rendering_includes_the_key_numbers() {
        let report = quick_report();
        let table = render_table(&report);
        assert!(table.contains("digoxin"));
        assert!(table.contains("pearson"));
        assert!(table.contains("kendall"));
        assert!(table.contains("p-value"));
    }
}
