use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::RunConfig;

#[derive(Debug, Parser)]
#[command(name = "bristle", version, about = "Stick-slip simulator for vertically driven bristle robots")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Equilibria, small-oscillation frequencies and the speed bound.
    Analyze(CommonArgs),
    /// One run: trajectory, events and summary.
    Simulate(CommonArgs),
    /// Average speed over a grid of drive frequencies.
    Sweep(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// TOML run configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Drive frequency (Hz). For `analyze` it replaces the bound-table frequencies.
    #[arg(long)]
    freq_hz: Option<f64>,
    /// Drive amplitude (m).
    #[arg(long)]
    amplitude_m: Option<f64>,
    /// Run length (s); per point for `sweep`.
    #[arg(long)]
    duration_s: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads for `sweep` (default: all available).
    #[arg(long)]
    parallel: Option<usize>,
}

enum Failure {
    Validation(anyhow::Error),
    Numerical(anyhow::Error),
    PartialSweep(anyhow::Error),
}

impl Failure {
    fn classify(err: anyhow::Error) -> Self {
        if err.downcast_ref::<commands::PartialSweep>().is_some() {
            return Failure::PartialSweep(err);
        }
        match err.downcast_ref::<bristle_core::Error>() {
            Some(bristle_core::Error::InvalidParameter(_)) | None => Failure::Validation(err),
            Some(_) => Failure::Numerical(err),
        }
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::PartialSweep(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Validation(e) | Failure::Numerical(e) | Failure::PartialSweep(e) => e,
        }
    }
}

fn load(args: &CommonArgs, is_analyze: bool) -> anyhow::Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(f) = args.freq_hz {
        if is_analyze {
            cfg.analyze.frequencies_hz = vec![f];
        }
        cfg.drive.frequency_hz = Some(f);
        cfg.drive.omega = None;
    }
    if let Some(a) = args.amplitude_m {
        cfg.drive.amplitude = a;
    }
    if let Some(d) = args.duration_s {
        cfg.simulate.duration = Some(d);
        cfg.sweep.duration_per_point = Some(d);
    }
    if let Some(dir) = &args.out_dir {
        cfg.output.dir = dir.clone();
    }
    if args.parallel == Some(0) {
        anyhow::bail!("--parallel must be at least 1");
    }
    cfg.validate().context("invalid configuration")?;
    Ok(cfg)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Analyze(args) => {
            let cfg = load(&args, true)?;
            commands::analyze(&cfg, args.out_dir.as_deref())
        }
        Command::Simulate(args) => {
            let cfg = load(&args, false)?;
            commands::simulate(&cfg, &cfg.output.dir)
        }
        Command::Sweep(args) => {
            let cfg = load(&args, false)?;
            commands::sweep(&cfg, &cfg.output.dir, args.parallel)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let failure = Failure::classify(err);
            eprintln!("error: {:#}", failure.error());
            ExitCode::from(failure.code())
        }
    }
}
