//! `parcop` command-line interface.
//!
//! Five subcommands cover the pipeline end to end: `transform` emits
//! pseudo-observations, `test` runs permutation tests on a dataset,
//! `simulate` and `bandwidth-sweep` drive the rejection-rate studies, and
//! `reproduce-digoxin` runs the whole digoxin analysis in one shot.
//!
//! Output convention: machine-readable results go to stdout (or to files
//! under `--out <DIR>`), human-readable summaries and progress go to stderr.
//! A flat TOML file passed with `--config` supplies defaults for any long
//! flag; explicit flags always win. Exit status is 0 iff the run completed —
//! p-values never gate it.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use parcop::data::{digoxin_dataset, load_csv, DatasetFile, Sample};
use parcop::kernel::{Bandwidth, EstimatorConfig};
use parcop::perm::PermutationMode;
use parcop::report::{
    render_sensitivity, render_table, report_json, run_test_pipeline, sensitivity_report,
    write_report_json, write_results_csv, write_results_csv_to, write_sensitivity_csv,
};
use parcop::sim::{run_bandwidth_robustness, run_power_study, RejectionTable, SimConfig};
use parcop::stats::{Sidedness, StatisticKind};
use parcop::transform::{
    partial_copula_transform, uniformity_diagnostic, write_pseudo_csv, write_pseudo_csv_to,
    PseudoSample, ResolvedConfig,
};

#[derive(Parser)]
#[command(
    name = "parcop",
    version,
    about = "Permutation tests of conditional independence via the partial copula"
)]
struct Cli {
    /// Flat TOML file supplying defaults for any long flag (flags win)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Map (x, y, z) rows to pseudo-observations (x, u, v)
    Transform(TransformArgs),
    /// Test Y independent of Z given X by permuting pseudo-observations
    Test(TestArgs),
    /// Rejection-rate study on simulated data across an error-correlation grid
    Simulate(SimulateArgs),
    /// Null rejection rates across a bandwidth grid (size robustness)
    BandwidthSweep(BandwidthSweepArgs),
    /// One-shot digoxin analysis: report, pseudo-data, and sensitivity table
    ReproduceDigoxin(ReproduceArgs),
}

#[derive(Args)]
struct DataOpts {
    /// Dataset: a headered CSV path, or "digoxin" for the embedded data
    #[arg(long, value_name = "PATH|digoxin")]
    data: Option<String>,
    /// Header name of the conditioning column [default: x]
    #[arg(long, value_name = "NAME")]
    x_column: Option<String>,
    /// Header name of the first response column [default: y]
    #[arg(long, value_name = "NAME")]
    y_column: Option<String>,
    /// Header name of the second response column [default: z]
    #[arg(long, value_name = "NAME")]
    z_column: Option<String>,
}

#[derive(Args)]
struct BandwidthOpts {
    /// Fixed kernel bandwidth for both margins (overrides any rule)
    #[arg(long, value_name = "H", conflicts_with = "bandwidth_rule")]
    bandwidth: Option<f64>,
    /// Bandwidth rule: "silverman" or "sim:<lambda>" [default: silverman]
    #[arg(long, value_name = "RULE")]
    bandwidth_rule: Option<String>,
    /// Leave each observation out of its own conditional CDF estimate
    #[arg(long)]
    loo: bool,
}

#[derive(Args)]
struct OutOpts {
    /// Directory for output files; without it results go to stdout
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Stdout format: json or csv (ignored when --out is given)
    #[arg(long, value_name = "FMT")]
    format: Option<String>,
}

#[derive(Args)]
struct TransformArgs {
    #[command(flatten)]
    data: DataOpts,
    #[command(flatten)]
    bandwidth: BandwidthOpts,
    #[command(flatten)]
    out: OutOpts,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    data: DataOpts,
    #[command(flatten)]
    bandwidth: BandwidthOpts,
    /// Statistics to run: pearson, kendall, hoeffding, kappa, taustar, or "all"
    #[arg(long, value_name = "LIST")]
    stats: Option<String>,
    /// Permutation resamples B [default: 100000]
    #[arg(long, value_name = "B")]
    resamples: Option<u64>,
    /// Root RNG seed; all randomness derives from it [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Rejection direction: auto, two, or upper [default: auto]
    #[arg(long, value_name = "SIDE")]
    sided: Option<String>,
    /// Resampling mode: mc or exhaustive [default: mc]
    #[arg(long, value_name = "MODE")]
    mode: Option<String>,
    #[command(flatten)]
    out: OutOpts,
}

#[derive(Args)]
struct SimOpts {
    /// Sample size per replication [default: 100]
    #[arg(long)]
    n: Option<usize>,
    /// Noise-to-signal ratio lambda = sigma_eps / sigma0 [default: 0.5]
    #[arg(long)]
    lambda: Option<f64>,
    /// Replications per grid point [default: 500]
    #[arg(long)]
    replications: Option<u64>,
    /// Permutation resamples B per replication [default: 500]
    #[arg(long, value_name = "B")]
    resamples: Option<u64>,
    /// Statistics to run [default: pearson,kendall]
    #[arg(long, value_name = "LIST")]
    stats: Option<String>,
    /// Root RNG seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Signal scale sigma0 [default: 1]
    #[arg(long)]
    sigma0: Option<f64>,
    /// Grid resolution of the integrated-Wiener signal paths [default: 1000]
    #[arg(long)]
    grid_m: Option<usize>,
    /// Draw the signal pair once and reuse it across replications
    #[arg(long)]
    fixed_paths: bool,
}

#[derive(Args)]
struct SimulateArgs {
    /// Error-correlation grid, comma separated [default: 0,0.3,0.6]
    #[arg(long, value_name = "LIST")]
    rho: Option<String>,
    #[command(flatten)]
    sim: SimOpts,
    #[command(flatten)]
    out: OutOpts,
}

#[derive(Args)]
struct BandwidthSweepArgs {
    /// Bandwidth grid, comma separated [default: 0.05,0.1,0.2,0.4]
    #[arg(long, value_name = "LIST")]
    bandwidths: Option<String>,
    #[command(flatten)]
    sim: SimOpts,
    #[command(flatten)]
    out: OutOpts,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Permutation resamples B [default: 100000]
    #[arg(long, value_name = "B")]
    resamples: Option<u64>,
    /// Root RNG seed [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: digoxin-out]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

/// Flat `key = value` mirror of every long flag. Keys irrelevant to the
/// subcommand being run are ignored; unknown keys are errors.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    data: Option<String>,
    x_column: Option<String>,
    y_column: Option<String>,
    z_column: Option<String>,
    bandwidth: Option<f64>,
    bandwidth_rule: Option<String>,
    loo: Option<bool>,
    stats: Option<String>,
    resamples: Option<u64>,
    seed: Option<u64>,
    sided: Option<String>,
    mode: Option<String>,
    out: Option<PathBuf>,
    format: Option<String>,
    n: Option<usize>,
    lambda: Option<f64>,
    rho: Option<String>,
    bandwidths: Option<String>,
    replications: Option<u64>,
    sigma0: Option<f64>,
    grid_m: Option<usize>,
    fixed_paths: Option<bool>,
}

#[derive(Clone, Copy, PartialEq)]
enum OutputFormat {
    Json,
    Csv,
}

fn main() -> std::process::ExitCode {
    match run() {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::ExitCode::FAILURE
        }
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config file {}", path.display()))?;
            toml::from_str(&text)
                .with_context(|| format!("parsing config file {}", path.display()))?
        }
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Transform(args) => cmd_transform(args, &file),
        Command::Test(args) => cmd_test(args, &file),
        Command::Simulate(args) => cmd_simulate(args, &file),
        Command::BandwidthSweep(args) => cmd_bandwidth_sweep(args, &file),
        Command::ReproduceDigoxin(args) => cmd_reproduce_digoxin(args, &file),
    }
}

// ---- flag resolution ------------------------------------------------------

fn load_sample(data: &DataOpts, file: &FileConfig) -> Result<(String, Sample)> {
    let spec = data
        .data
        .clone()
        .or_else(|| file.data.clone())
        .context("no dataset given; pass --data <PATH> or --data digoxin")?;
    if spec == "digoxin" {
        return Ok((spec, digoxin_dataset()));
    }
    let mut dataset = DatasetFile::new(&spec);
    if let Some(c) = data.x_column.clone().or_else(|| file.x_column.clone()) {
        dataset.x_column = c;
    }
    if let Some(c) = data.y_column.clone().or_else(|| file.y_column.clone()) {
        dataset.y_column = c;
    }
    if let Some(c) = data.z_column.clone().or_else(|| file.z_column.clone()) {
        dataset.z_column = c;
    }
    let sample = load_csv(&dataset)?;
    Ok((spec, sample))
}

/// Precedence within the bandwidth group is all-or-nothing: if either
/// `--bandwidth` or `--bandwidth-rule` appears on the command line, the
/// config file's pair is ignored entirely — otherwise a file rule could
/// silently survive a flag override.
fn resolve_estimator(bw: &BandwidthOpts, file: &FileConfig) -> Result<EstimatorConfig> {
    let (explicit, rule) = if bw.bandwidth.is_some() || bw.bandwidth_rule.is_some() {
        (bw.bandwidth, bw.bandwidth_rule.clone())
    } else {
        if file.bandwidth.is_some() && file.bandwidth_rule.is_some() {
            bail!("config file sets both bandwidth and bandwidth_rule; choose one");
        }
        (file.bandwidth, file.bandwidth_rule.clone())
    };
    let config = match (explicit, rule) {
        (Some(h), _) => EstimatorConfig::explicit(Bandwidth::new(h)?),
        (None, None) => EstimatorConfig::silverman(),
        (None, Some(rule)) => parse_rule(&rule)?,
    };
    let loo = bw.loo || file.loo.unwrap_or(false);
    Ok(config.with_leave_one_out(loo))
}

fn parse_rule(rule: &str) -> Result<EstimatorConfig> {
    let rule = rule.trim();
    if rule.eq_ignore_ascii_case("silverman") {
        return Ok(EstimatorConfig::silverman());
    }
    if let Some(lambda) = rule.strip_prefix("sim:") {
        let lambda: f64 = lambda
            .trim()
            .parse()
            .with_context(|| format!("bad lambda in bandwidth rule {rule:?}"))?;
        return Ok(EstimatorConfig::simulation(lambda));
    }
    bail!("unknown bandwidth rule {rule:?}; valid: silverman, sim:<lambda>");
}

fn parse_stats(spec: &str) -> Result<Vec<StatisticKind>> {
    if spec.trim().eq_ignore_ascii_case("all") {
        return Ok(StatisticKind::ALL.to_vec());
    }
    let kinds = spec
        .split(',')
        .filter(|tok| !tok.trim().is_empty())
        .map(|tok| StatisticKind::parse(tok).map_err(anyhow::Error::from))
        .collect::<Result<Vec<_>>>()?;
    if kinds.is_empty() {
        bail!("no statistics requested");
    }
    Ok(kinds)
}

fn parse_sided(spec: &str) -> Result<Option<Sidedness>> {
    match spec.trim().to_ascii_lowercase().as_str() {
        "auto" => Ok(None),
        "two" => Ok(Some(Sidedness::TwoSided)),
        "upper" => Ok(Some(Sidedness::Upper)),
        other => bail!("unknown sidedness {other:?}; valid: auto, two, upper"),
    }
}

fn parse_mode(spec: &str) -> Result<PermutationMode> {
    match spec.trim().to_ascii_lowercase().as_str() {
        "mc" | "monte_carlo" | "monte-carlo" => Ok(PermutationMode::MonteCarlo),
        "exhaustive" => Ok(PermutationMode::Exhaustive),
        other => bail!("unknown mode {other:?}; valid: mc, exhaustive"),
    }
}

fn parse_format(spec: Option<&str>, default: OutputFormat) -> Result<OutputFormat> {
    match spec {
        None => Ok(default),
        Some(s) => match s.trim().to_ascii_lowercase().as_str() {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => bail!("unknown format {other:?}; valid: json, csv"),
        },
    }
}

fn parse_f64_list(spec: &str, what: &str) -> Result<Vec<f64>> {
    let values = spec
        .split(',')
        .filter(|tok| !tok.trim().is_empty())
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .with_context(|| format!("bad {what} value {tok:?}"))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        bail!("empty {what} list");
    }
    Ok(values)
}

fn build_sim_config(sim: &SimOpts, file: &FileConfig) -> SimConfig {
    let n = sim.n.or(file.n).unwrap_or(100);
    let lambda = sim.lambda.or(file.lambda).unwrap_or(0.5);
    let seed = sim.seed.or(file.seed).unwrap_or(0);
    let mut config = SimConfig::new(n, lambda, 0.0, seed);
    if let Some(sigma0) = sim.sigma0.or(file.sigma0) {
        config = config.with_sigma0(sigma0);
    }
    if let Some(grid_m) = sim.grid_m.or(file.grid_m) {
        config = config.with_grid_m(grid_m);
    }
    if sim.fixed_paths || file.fixed_paths.unwrap_or(false) {
        config = config.with_fixed_paths();
    }
    config
}

// ---- subcommands ----------------------------------------------------------

/// JSON view of a transform run, mirroring the pseudo.csv columns.
#[derive(Serialize)]
struct TransformReport<'a> {
    data: &'a str,
    n: usize,
    config: &'a ResolvedConfig,
    x: &'a [f64],
    u: &'a [f64],
    v: &'a [f64],
}

fn cmd_transform(args: TransformArgs, file: &FileConfig) -> Result<()> {
    let (label, sample) = load_sample(&args.data, file)?;
    let estimator = resolve_estimator(&args.bandwidth, file)?;
    let pseudo = partial_copula_transform(&sample, &estimator)?;
    let ks_u = uniformity_diagnostic(pseudo.us())?;
    let ks_v = uniformity_diagnostic(pseudo.vs())?;
    let config = pseudo.config();
    eprintln!(
        "{label}: n = {}, h_y = {}, h_z = {}, KS from uniform: u = {ks_u:.4}, v = {ks_v:.4}",
        pseudo.n(),
        config.h_y.value(),
        config.h_z.value()
    );

    let out_dir = args.out.out.clone().or_else(|| file.out.clone());
    match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(&dir)
                .with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join("pseudo.csv");
            write_pseudo_csv(&path, &sample, &pseudo)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let format = parse_format(
                args.out.format.as_deref().or(file.format.as_deref()),
                OutputFormat::Csv,
            )?;
            emit_transform(&label, &sample, &pseudo, format)?;
        }
    }
    Ok(())
}

fn emit_transform(
    label: &str,
    sample: &Sample,
    pseudo: &PseudoSample,
    format: OutputFormat,
) -> Result<()> {
    let stdout = std::io::stdout();
    match format {
        OutputFormat::Csv => write_pseudo_csv_to(stdout.lock(), sample, pseudo)?,
        OutputFormat::Json => {
            let view = TransformReport {
                data: label,
                n: pseudo.n(),
                config: pseudo.config(),
                x: sample.xs(),
                u: pseudo.us(),
                v: pseudo.vs(),
            };
            let mut out = serde_json::to_string_pretty(&view)?;
            out.push('\n');
            print!("{out}");
        }
    }
    Ok(())
}

fn cmd_test(args: TestArgs, file: &FileConfig) -> Result<()> {
    let (label, sample) = load_sample(&args.data, file)?;
    let estimator = resolve_estimator(&args.bandwidth, file)?;
    let stats_spec = args
        .stats
        .clone()
        .or_else(|| file.stats.clone())
        .unwrap_or_else(|| "all".into());
    let kinds = parse_stats(&stats_spec)?;
    let sided = parse_sided(
        args.sided
            .as_deref()
            .or(file.sided.as_deref())
            .unwrap_or("auto"),
    )?;
    let mode = parse_mode(args.mode.as_deref().or(file.mode.as_deref()).unwrap_or("mc"))?;
    let resamples = args.resamples.or(file.resamples).unwrap_or(100_000);
    let seed = args.seed.or(file.seed).unwrap_or(0);

    let report = run_test_pipeline(
        &label, &sample, &estimator, &kinds, sided, resamples, seed, mode,
    )?;
    eprint!("{}", render_table(&report));

    let out_dir = args.out.out.clone().or_else(|| file.out.clone());
    match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(&dir)
                .with_context(|| format!("creating {}", dir.display()))?;
            let json_path = dir.join("report.json");
            write_report_json(&json_path, &report)?;
            let csv_path = dir.join("results.csv");
            write_results_csv(&csv_path, &report)?;
            eprintln!("wrote {}", json_path.display());
            eprintln!("wrote {}", csv_path.display());
        }
        None => {
            let format = parse_format(
                args.out.format.as_deref().or(file.format.as_deref()),
                OutputFormat::Json,
            )?;
            match format {
                OutputFormat::Json => print!("{}", report_json(&report)?),
                OutputFormat::Csv => {
                    let stdout = std::io::stdout();
                    write_results_csv_to(stdout.lock(), &report)?;
                }
            }
        }
    }
    Ok(())
}

fn cmd_simulate(args: SimulateArgs, file: &FileConfig) -> Result<()> {
    let config = build_sim_config(&args.sim, file);
    let rho_spec = args
        .rho
        .clone()
        .or_else(|| file.rho.clone())
        .unwrap_or_else(|| "0,0.3,0.6".into());
    let rho_grid = parse_f64_list(&rho_spec, "rho")?;
    let replications = args
        .sim
        .replications
        .or(file.replications)
        .unwrap_or(500);
    let resamples = args.sim.resamples.or(file.resamples).unwrap_or(500);
    let kinds = parse_stats(
        args.sim
            .stats
            .as_deref()
            .or(file.stats.as_deref())
            .unwrap_or("pearson,kendall"),
    )?;
    eprintln!(
        "simulating: n = {}, lambda = {}, rho grid {:?}, {} replications x B = {} ...",
        config.n, config.lambda, rho_grid, replications, resamples
    );
    let table = run_power_study(&config, &rho_grid, replications, resamples, &kinds)?;
    emit_table(&table, &args.out, file, "rejection.csv")
}

fn cmd_bandwidth_sweep(args: BandwidthSweepArgs, file: &FileConfig) -> Result<()> {
    let config = build_sim_config(&args.sim, file);
    let grid_spec = args
        .bandwidths
        .clone()
        .or_else(|| file.bandwidths.clone())
        .unwrap_or_else(|| "0.05,0.1,0.2,0.4".into());
    let grid = parse_f64_list(&grid_spec, "bandwidth")?;
    let replications = args
        .sim
        .replications
        .or(file.replications)
        .unwrap_or(500);
    let resamples = args.sim.resamples.or(file.resamples).unwrap_or(500);
    let kinds = parse_stats(
        args.sim
            .stats
            .as_deref()
            .or(file.stats.as_deref())
            .unwrap_or("pearson,kendall"),
    )?;
    eprintln!(
        "sweeping bandwidths {:?} under the null: n = {}, lambda = {}, {} replications x B = {} ...",
        grid, config.n, config.lambda, replications, resamples
    );
    let table = run_bandwidth_robustness(&config, &grid, replications, resamples, &kinds)?;
    emit_table(&table, &args.out, file, "sweep.csv")
}

fn emit_table(
    table: &RejectionTable,
    out: &OutOpts,
    file: &FileConfig,
    file_name: &str,
) -> Result<()> {
    let out_dir = out.out.clone().or_else(|| file.out.clone());
    match out_dir {
        Some(dir) => {
            std::fs::create_dir_all(&dir)
                .with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(file_name);
            table.write_csv(&path)?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let format = parse_format(
                out.format.as_deref().or(file.format.as_deref()),
                OutputFormat::Csv,
            )?;
            let stdout = std::io::stdout();
            match format {
                OutputFormat::Csv => table.write_csv_to(stdout.lock())?,
                OutputFormat::Json => {
                    let mut text = serde_json::to_string_pretty(table)?;
                    text.push('\n');
                    print!("{text}");
                }
            }
        }
    }
    Ok(())
}

fn cmd_reproduce_digoxin(args: ReproduceArgs, file: &FileConfig) -> Result<()> {
    let resamples = args.resamples.or(file.resamples).unwrap_or(100_000);
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let dir = args
        .out
        .or_else(|| file.out.clone())
        .unwrap_or_else(|| PathBuf::from("digoxin-out"));

    let sample = digoxin_dataset();
    let estimator = EstimatorConfig::silverman();
    let kinds = StatisticKind::ALL;
    let report = run_test_pipeline(
        "digoxin",
        &sample,
        &estimator,
        &kinds,
        None,
        resamples,
        seed,
        PermutationMode::MonteCarlo,
    )?;
    let pseudo = partial_copula_transform(&sample, &estimator)?;
    eprintln!("running sensitivity grid (estimation x sidedness) ...");
    let sensitivity = sensitivity_report(
        &sample,
        &estimator,
        &kinds,
        resamples,
        seed,
        PermutationMode::MonteCarlo,
    )?;

    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    write_report_json(&dir.join("report.json"), &report)?;
    write_results_csv(&dir.join("results.csv"), &report)?;
    write_pseudo_csv(&dir.join("pseudo.csv"), &sample, &pseudo)?;
    write_sensitivity_csv(&dir.join("sensitivity.csv"), &sensitivity)?;

    eprint!("{}", render_table(&report));
    eprintln!();
    eprint!("{}", render_sensitivity(&sensitivity));
    for name in ["report.json", "results.csv", "pseudo.csv", "sensitivity.csv"] {
        eprintln!("wrote {}", dir.join(name).display());
    }
    print!("{}", report_json(&report)?);
    std::io::stdout().flush()?;
    Ok(())
}
