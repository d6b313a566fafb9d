use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use gmrf_graphlearn::{run_command, CliError, Command, ExperimentConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Sample,
    Fit,
    Predict,
    Evaluate,
    #[value(name = "estimate-r2")]
    EstimateR2,
    Spectra,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Self {
        match c {
            Cmd::Sample => Command::Sample,
            Cmd::Fit => Command::Fit,
            Cmd::Predict => Command::Predict,
            Cmd::Evaluate => Command::Evaluate,
            Cmd::EstimateR2 => Command::EstimateR2,
            Cmd::Spectra => Command::Spectra,
        }
    }
}

/// Gaussian MRF graph learning experiments.
///
/// Set GMRF_THREADS to cap the worker threads and RUST_LOG=info for progress.
#[derive(Debug, Parser)]
#[command(name = "gmrf-graphlearn", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configuration's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the configuration's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("GMRF_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| CliError::Config(format!("GMRF_THREADS must be a positive integer, got `{value}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot configure thread pool: {e}")))
}

fn run(args: Args) -> Result<PathBuf, CliError> {
    configure_threads()?;
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = args.out {
        cfg.output_dir = out;
    }
    Ok(run_command(args.command.into(), &cfg)?.summary_path)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
