//! Batch front end: `roadspeed <command> --config <path> --out <dir> [--seed <u64>]`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 validation failure. `ROADSPEED_THREADS` caps the worker pool.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::Parser;
use serde::Serialize;

use crate::asymptotics::{classify_regime, sweep_r, Regime};
use crate::dispersion::{c_min_crossing, threshold_d, upper_bound_speed};
use crate::error::{Error, Result};
use crate::pdesim::{run_front_speed, SimConfig};
use crate::speed::{SpeedProblem, SpeedRegime};
use crate::validate::run_suite;
pub use config::{Command, FileConfig, RunConfig};
use output::{write_json, Csv};

#[derive(Debug, Parser)]
#[command(
    name = "roadspeed",
    version,
    about = "Spreading speeds for road-field KPP systems"
)]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    pub out: PathBuf,
    /// Seed for the randomized checks of `validate`.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&args) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            0
        }
        Err(e) => {
            eprintln!("roadspeed {}: {e}", command_name(args.command));
            e.exit_code()
        }
    }
}

fn command_name(c: Command) -> &'static str {
    match c {
        Command::Speed => "speed",
        Command::Sweep => "sweep",
        Command::Threshold => "threshold",
        Command::Simulate => "simulate",
        Command::Validate => "validate",
    }
}

pub fn run(args: &Args) -> Result<Vec<PathBuf>> {
    configure_threads()?;
    let cfg = RunConfig::load(args.command, &args.config, &args.out, args.seed)?;
    execute(&cfg)
}

/// Sizes the global rayon pool from `ROADSPEED_THREADS`, once per process.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("ROADSPEED_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| {
        Error::Config(format!(
            "ROADSPEED_THREADS must be a positive integer (got `{raw}`)"
        ))
    })?;
    // A second call in the same process finds the pool already built.
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global();
    Ok(())
}

/// Runs a validated configuration and returns the files written.
pub fn execute(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(&cfg.out)?;
    match cfg.command {
        Command::Speed => speed(cfg),
        Command::Sweep => sweep(cfg),
        Command::Threshold => threshold(cfg),
        Command::Simulate => simulate(cfg),
        Command::Validate => validate(cfg),
    }
}

#[derive(Serialize)]
struct SpeedReport {
    c_star: f64,
    lambda_star: Option<f64>,
    regime: SpeedRegime,
    c_kpp: f64,
    c_upper: Option<f64>,
    gap_at_cstar: f64,
    /// `G` at `0.999 c*` and `1.001 c*`; absent for the subcritical shortcut.
    gap_below: Option<f64>,
    gap_above: Option<f64>,
    iterations: usize,
    bracket: (f64, f64),
}

fn speed(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let problem = SpeedProblem::new(&cfg.params, &cfg.mu, &cfg.nu, &cfg.grid)?;
    let r = problem.find_cstar()?;
    let (gap_below, gap_above) = if r.regime == SpeedRegime::Computed {
        (
            Some(problem.intersection_gap(0.999 * r.c_star)?.value),
            Some(problem.intersection_gap(1.001 * r.c_star)?.value),
        )
    } else {
        (None, None)
    };
    let report = SpeedReport {
        c_star: r.c_star,
        lambda_star: r.lambda_star,
        regime: r.regime,
        c_kpp: cfg.params.c_kpp(),
        c_upper: upper_bound_speed(&cfg.params).ok(),
        gap_at_cstar: r.gap_at_cstar,
        gap_below,
        gap_above,
        iterations: r.iterations,
        bracket: r.bracket,
    };
    let mut csv = Csv::new(&["lambda", "psi1", "psi2"]);
    for s in problem.gamma_curves(r.c_star, cfg.gamma_points)? {
        csv.row(&[Some(s.lambda), Some(s.psi1), s.psi2]);
    }
    Ok(vec![
        write_json(&cfg.out, "speed.json", &report)?,
        csv.write(&cfg.out, "gamma-curves.csv")?,
    ])
}

fn sweep(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let s = sweep_r(
        &cfg.params,
        &cfg.mu,
        &cfg.nu,
        cfg.sweep.rescale,
        &cfg.sweep.scales,
        &cfg.grid,
    )?;
    let mut csv = Csv::new(&["R", "c_star", "predicted_limit"]);
    for (r, c) in s.scales.iter().zip(&s.speeds) {
        csv.row(&[Some(*r), Some(*c), Some(s.predicted_limit)]);
    }
    Ok(vec![
        csv.write(&cfg.out, "sweep.csv")?,
        write_json(&cfg.out, "sweep-summary.json", &s)?,
    ])
}

#[derive(Serialize)]
struct ThresholdTable {
    c_kpp: f64,
    threshold_d: f64,
    /// Present only above the threshold.
    c_min: Option<f64>,
    /// Present only when `D > d`.
    c_upper: Option<f64>,
    regime: Regime,
    predicted_infimum: f64,
}

fn threshold(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let p = &cfg.params;
    let info = classify_regime(p)?;
    let table = ThresholdTable {
        c_kpp: p.c_kpp(),
        threshold_d: threshold_d(p),
        c_min: (p.d_road > threshold_d(p))
            .then(|| c_min_crossing(p))
            .transpose()?,
        c_upper: upper_bound_speed(p).ok(),
        regime: info.regime,
        predicted_infimum: info.predicted_infimum,
    };
    Ok(vec![write_json(&cfg.out, "threshold.json", &table)?])
}

#[derive(Serialize)]
struct SpeedComparison {
    c_star: f64,
    fitted_speed: f64,
    relative_difference: f64,
    plateau: f64,
    sim: SimConfig,
}

fn simulate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let r = SpeedProblem::new(&cfg.params, &cfg.mu, &cfg.nu, &cfg.grid)?.find_cstar()?;
    let trace = run_front_speed(&cfg.sim, &cfg.params, &cfg.mu, &cfg.nu)?;
    let mut csv = Csv::new(&["t", "x_front"]);
    for (t, x) in trace.times.iter().zip(&trace.positions) {
        csv.row(&[Some(*t), *x]);
    }
    let cmp = SpeedComparison {
        c_star: r.c_star,
        fitted_speed: trace.fitted_speed,
        relative_difference: (trace.fitted_speed - r.c_star) / r.c_star,
        plateau: trace.plateau,
        sim: cfg.sim,
    };
    Ok(vec![
        csv.write(&cfg.out, "front.csv")?,
        write_json(&cfg.out, "speed-compare.json", &cmp)?,
    ])
}

fn validate(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let report = run_suite(&cfg.params, &cfg.mu, &cfg.nu, &cfg.grid, cfg.seed)?;
    let path = write_json(&cfg.out, "validate-report.json", &report)?;
    if !report.passed {
        let names: Vec<&str> = report.failures().map(|c| c.name).collect();
        return Err(Error::Validation(format!(
            "{} check(s) failed: {}; see {}",
            names.len(),
            names.join(", "),
            path.display()
        )));
    }
    Ok(vec![path])
}

/// Convenience for tests and scripts: runs `command` on a config file.
pub fn run_file(
    command: Command,
    config: &Path,
    out: &Path,
    seed: Option<u64>,
) -> Result<Vec<PathBuf>> {
    execute(&RunConfig::load(command, config, out, seed)?)
}
