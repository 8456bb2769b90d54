use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cyclab_core::config::{ExperimentConfig, MeasureSpec};
use cyclab_core::entropy::{entropy_trend, kappa_entropy, make_cantor_set};
use cyclab_core::pipeline::{cidd_checks, cidr_checks, run_cidd, run_cidr, EvalDump};
use cyclab_core::report::{write_json, Check};
use cyclab_core::roberts::{decompose, level_summaries, residual_support_entropy};
use cyclab_core::schedules::{build_disdini_schedule, build_epsilon_schedule, build_w_adapted_grid, verify_epsilon_schedule};
use cyclab_core::transforms::write_eval_csv;
use cyclab_core::verify::verify_all;
use cyclab_core::{CantorSpec, LabError};

#[derive(Parser)]
#[command(name = "cyclab", version, about = "Cyclicity experiments for singular inner functions in weighted growth spaces")]
struct Cli {
    /// Experiment config (JSON). Defaults to the built-in config of the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for report.json and CSV dumps.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Format of the summary written to stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum CantorKind {
    MiddleThird,
    EntropyDivergent,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the configured weight.
    ClassifyWeight {
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Build the W-adapted dyadic grid.
    BuildGrid {
        #[arg(long)]
        n0: Option<u32>,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Build a uniform schedule and its coefficients for one N.
    BuildSchedule {
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long)]
        a: Option<f64>,
        #[arg(long)]
        eps0: Option<f64>,
    },
    /// Roberts decomposition of the configured measure.
    Decompose {
        #[arg(long, default_value_t = 0.5)]
        eta: f64,
    },
    /// Entropy partial sums of a Cantor set.
    Entropy {
        #[arg(long, value_enum)]
        cantor: Option<CantorKind>,
        #[arg(long, default_value_t = 20)]
        depth: u32,
    },
    RunCidr,
    RunCidd,
    /// Property suite plus the configured (or both default) pipelines.
    Verify,
}

fn load(cli: &Cli, fallback: fn() -> ExperimentConfig) -> Result<ExperimentConfig, LabError> {
    match &cli.config {
        Some(path) => ExperimentConfig::from_file(path),
        None => Ok(fallback()),
    }
}

fn ensure_out(out: &Path) -> Result<(), LabError> {
    fs::create_dir_all(out)?;
    Ok(())
}

/// Writes `report.json` under `--out` (if given) and the summary to stdout.
fn emit<R: Serialize, T: Serialize>(cli: &Cli, report: &R, rows: &[T]) -> Result<(), LabError> {
    if let Some(out) = &cli.out {
        ensure_out(out)?;
        write_json(report, &out.join("report.json"))?;
    }
    let stdout = io::stdout();
    match cli.format {
        Format::Json => {
            let mut lock = stdout.lock();
            serde_json::to_writer_pretty(&mut lock, report)?;
            writeln!(lock)?;
        }
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(stdout.lock());
            for row in rows {
                writer.serialize(row)?;
            }
            writer.flush()?;
        }
    }
    Ok(())
}

fn write_dumps(cli: &Cli, dumps: &[EvalDump]) -> Result<(), LabError> {
    if let Some(out) = &cli.out {
        ensure_out(out)?;
        for dump in dumps {
            let file = fs::File::create(out.join(format!("{}.csv", dump.name)))?;
            write_eval_csv(&dump.rows, io::BufWriter::new(file))?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct TraceRow {
    t: f64,
    doubling_ratio: f64,
    dini_ratio: f64,
    log_integral: f64,
    sqrt_integral: f64,
}

#[derive(Serialize)]
struct LevelRow {
    k: usize,
    level: u64,
    arc_length: f64,
    w: f64,
}

#[derive(Serialize)]
struct ScheduleRow {
    k: usize,
    level: u64,
    epsilon: f64,
}

#[derive(Serialize)]
struct StageRow {
    stage: usize,
    partial_sum: f64,
}

#[derive(Serialize)]
struct CidrRow {
    eta: f64,
    deviation: f64,
    weighted_sup: f64,
    compact_deviation: f64,
    residual_fraction: f64,
    poisson_constant: f64,
}

#[derive(Serialize)]
struct CiddRow {
    n: usize,
    c0: f64,
    weighted_sup: f64,
    compact_deviation: f64,
    poisson_constant: f64,
}

#[derive(Serialize)]
struct CheckRow<'a> {
    name: &'a str,
    hard: bool,
    passed: bool,
    detail: &'a str,
}

fn check_rows(checks: &[Check]) -> Vec<CheckRow<'_>> {
    checks
        .iter()
        .map(|c| CheckRow {
            name: &c.name,
            hard: c.hard,
            passed: c.passed,
            detail: &c.detail,
        })
        .collect()
}

fn run(cli: &Cli) -> Result<ExitCode, LabError> {
    match &cli.command {
        Command::ClassifyWeight { resolution } => {
            let config = load(cli, ExperimentConfig::default_cidr)?;
            let c = config.weight.classify(resolution.unwrap_or(config.classification_resolution))?;
            let t = &c.traces;
            let rows: Vec<TraceRow> = (0..t.t.len())
                .map(|j| TraceRow {
                    t: t.t[j],
                    doubling_ratio: t.doubling_ratio[j],
                    dini_ratio: t.dini_ratio[j],
                    log_integral: t.log_integral[j],
                    sqrt_integral: t.sqrt_integral[j],
                })
                .collect();
            emit(cli, &c, &rows)?;
        }
        Command::BuildGrid { n0, depth } => {
            let config = load(cli, ExperimentConfig::default_cidr)?;
            let p = config.cidr_params();
            let grid = build_w_adapted_grid(&config.weight, n0.unwrap_or(p.n0), depth.unwrap_or(p.depth))?;
            let rows: Vec<LevelRow> = grid
                .levels
                .iter()
                .enumerate()
                .map(|(k, &level)| LevelRow {
                    k,
                    level,
                    arc_length: grid.arc_length(k),
                    w: grid.log_inv_at(&config.weight, k),
                })
                .collect();
            emit(cli, &grid, &rows)?;
        }
        Command::BuildSchedule { n, a, eps0 } => {
            let config = load(cli, ExperimentConfig::default_cidd)?;
            let p = config.cidd_params();
            let a = a.unwrap_or_else(|| p.a_for(*n));
            let eps0 = eps0.unwrap_or_else(|| p.eps0_for(*n));
            let grid = build_disdini_schedule(&config.weight, a, p.m0, n + 2)?;
            let schedule = build_epsilon_schedule(&config.weight, &grid, eps0, *n)?;
            let verification = verify_epsilon_schedule(&schedule, &grid, &config.weight)?;
            let rows: Vec<ScheduleRow> = schedule
                .epsilons
                .iter()
                .enumerate()
                .map(|(k, &epsilon)| ScheduleRow {
                    k,
                    level: grid.levels[k],
                    epsilon,
                })
                .collect();
            let report = serde_json::json!({
                "schema": cyclab_core::report::SCHEMA_VERSION,
                "grid": grid,
                "schedule": schedule,
                "verification": verification,
            });
            emit(cli, &report, &rows)?;
        }
        Command::Decompose { eta } => {
            let config = load(cli, ExperimentConfig::default_cidr)?;
            let p = config.cidr_params();
            let mu = config.build_measure()?;
            let grid = build_w_adapted_grid(&config.weight, p.n0, p.depth)?;
            let dec = decompose(&mu, &config.weight, &grid, *eta)?;
            let report = serde_json::json!({
                "schema": cyclab_core::report::SCHEMA_VERSION,
                "eta": eta,
                "grid": dec.grid,
                "total_mass": dec.total_mass,
                "extracted_mass": dec.extracted_mass(),
                "residual_mass": dec.residual_mass(),
                "truncation_depth": dec.truncation_depth,
                "levels": level_summaries(&dec),
                "residual_entropy": residual_support_entropy(&dec, &config.weight),
            });
            emit(cli, &report, &level_summaries(&dec))?;
        }
        Command::Entropy { cantor, depth } => {
            let config = load(cli, ExperimentConfig::default_cidr)?;
            let spec = match (cantor, &config.measure) {
                (Some(CantorKind::MiddleThird), _) => CantorSpec::MiddleThird,
                (Some(CantorKind::EntropyDivergent), _) => CantorSpec::EntropyDivergent,
                (None, MeasureSpec::Cantor { cantor, .. }) => cantor.clone(),
                (None, _) => CantorSpec::MiddleThird,
            };
            let set = make_cantor_set(&spec, *depth)?;
            let sums = kappa_entropy(&set, &config.weight)?;
            let rows: Vec<StageRow> = sums
                .partial_sums
                .iter()
                .enumerate()
                .map(|(i, &partial_sum)| StageRow {
                    stage: i + 1,
                    partial_sum,
                })
                .collect();
            let report = serde_json::json!({
                "schema": cyclab_core::report::SCHEMA_VERSION,
                "cantor": spec,
                "depth": depth,
                "weight": config.weight,
                "partial_sums": sums.partial_sums,
                "total": sums.total,
                "trend": entropy_trend(&sums.partial_sums),
            });
            emit(cli, &report, &rows)?;
        }
        Command::RunCidr => {
            let config = load(cli, ExperimentConfig::default_cidr)?;
            let out = run_cidr(&config)?;
            write_dumps(cli, &out.dumps)?;
            let rows: Vec<CidrRow> = out
                .report
                .runs
                .iter()
                .map(|r| CidrRow {
                    eta: r.eta,
                    deviation: r.deviation.value,
                    weighted_sup: r.weighted_sup.value,
                    compact_deviation: r.compact_deviation.value,
                    residual_fraction: r.residual_fraction,
                    poisson_constant: r.poisson.constant,
                })
                .collect();
            emit(cli, &out.report, &rows)?;
            report_checks(&cidr_checks(&out.report));
        }
        Command::RunCidd => {
            let config = load(cli, ExperimentConfig::default_cidd)?;
            let out = run_cidd(&config)?;
            write_dumps(cli, &out.dumps)?;
            let rows: Vec<CiddRow> = out
                .report
                .runs
                .iter()
                .map(|r| CiddRow {
                    n: r.n,
                    c0: r.schedule.c0,
                    weighted_sup: r.weighted_sup.value,
                    compact_deviation: r.compact_deviation.value,
                    poisson_constant: r.poisson.constant,
                })
                .collect();
            emit(cli, &out.report, &rows)?;
            report_checks(&cidd_checks(&out.report));
        }
        Command::Verify => {
            let configs = match &cli.config {
                Some(path) => vec![ExperimentConfig::from_file(path)?],
                None => vec![ExperimentConfig::default_cidr(), ExperimentConfig::default_cidd()],
            };
            let report = verify_all(&configs, cli.seed)?;
            emit(cli, &report, &check_rows(&report.checks))?;
            report_checks(&report.checks);
            if !report.passed {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Failing checks go to stderr so stdout stays machine-readable.
fn report_checks(checks: &[Check]) {
    for c in checks.iter().filter(|c| !c.passed) {
        let kind = if c.hard { "FAIL" } else { "warn" };
        eprintln!("{kind}: {} ({})", c.name, c.detail);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
