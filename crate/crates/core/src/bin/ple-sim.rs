//! `ple-sim`: Monte Carlo experiments and single-file PLE estimation.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error,
//! 3 input-format error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ple_core::estimators::Method;
use ple_core::harness::{
    run_density_sweep, run_detect_calibration, run_routing, run_shadow_sweep, single_estimate,
    write_csv_to, Experiment, ExperimentConfig,
};
use ple_core::Error;

#[derive(Parser)]
#[command(
    name = "ple-sim",
    version,
    about = "Path-loss exponent self-estimation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per sweep cell.
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat `key = value` config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    dimension: Option<u8>,
}

#[derive(Subcommand)]
enum Command {
    /// Normalized RMSE over the (PLE, shadowing) grid.
    SweepShadow(Common),
    /// Normalized RMSE over the (PLE, density) grid.
    SweepDensity(Common),
    /// kth-nearest routing tables.
    Routing {
        #[command(flatten)]
        common: Common,
        /// `analytic` for f(k) over alpha, `mc` for simulated per-hop loss.
        #[arg(long, default_value = "analytic")]
        mode: String,
    },
    /// Range-test calibration on honest and cheating suspects.
    Detect {
        #[command(flatten)]
        common: Common,
        /// Optional per-test event log CSV.
        #[arg(long)]
        events: Option<PathBuf>,
    },
    /// Estimate the PLE from a file with one RSS value (dB) per line.
    Estimate {
        #[command(flatten)]
        common: Common,
        file: PathBuf,
        /// TLS_SVD, TLS_CLOSED or WTLS.
        #[arg(long, default_value = "WTLS")]
        method: String,
    },
}

fn load(common: &Common, experiment: Experiment) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    cfg.experiment = experiment;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(t) = common.trials {
        cfg.trials = t;
    }
    if let Some(d) = common.dimension {
        cfg.dimension = d as usize;
    }
    if let Some(o) = &common.out {
        cfg.output_path = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::SweepShadow(c) => {
            let cfg = load(&c, Experiment::ShadowSweep)?;
            write_csv_to(cfg.output_path.as_deref(), &run_shadow_sweep(&cfg)?)
        }
        Command::SweepDensity(c) => {
            let cfg = load(&c, Experiment::DensitySweep)?;
            write_csv_to(cfg.output_path.as_deref(), &run_density_sweep(&cfg)?)
        }
        Command::Routing { common, mode } => {
            let exp = match mode.as_str() {
                "analytic" => Experiment::RoutingAnalytic,
                "mc" => Experiment::RoutingMc,
                other => return Err(Error::Config(format!("unknown routing mode '{other}'"))),
            };
            let cfg = load(&common, exp)?;
            write_csv_to(cfg.output_path.as_deref(), &run_routing(&cfg)?)
        }
        Command::Detect { common, events } => {
            let cfg = load(&common, Experiment::DetectCalibration)?;
            let out = run_detect_calibration(&cfg)?;
            if let Some(p) = events {
                write_csv_to(Some(&p), &out.events)?;
            }
            write_csv_to(cfg.output_path.as_deref(), &out.rows)
        }
        Command::Estimate {
            common,
            file,
            method,
        } => {
            let cfg = load(&common, Experiment::SingleEstimate)?;
            let method: Method = method
                .parse()
                .map_err(|e: Error| Error::Config(e.to_string()))?;
            let r = single_estimate(Path::new(&file), cfg.dimension, method)?;
            let eta = r.eta.map_or("none".to_string(), |e| e.to_string());
            let flag = r.degenerate.map_or("none".to_string(), |d| d.to_string());
            println!(
                "method={} gamma_hat={} samples={} eta={} degenerate={}",
                r.method, r.gamma_hat, r.sample_count, eta, flag
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Config(_) => 2,
                Error::InputFormat { .. } => 3,
                _ => 1,
            })
        }
    }
}
