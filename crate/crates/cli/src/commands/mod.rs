//! The six subcommands. Each writes its files into the output directory and
//! returns the summary JSON it wrote.

mod estimate;
mod evaluate;
mod fit;
mod predict;
mod sample;
mod spectra;

use std::path::PathBuf;

use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::CliResult;

pub use estimate::cmd_estimate_r2;
pub use evaluate::cmd_evaluate;
pub use fit::cmd_fit;
pub use predict::cmd_predict;
pub use sample::cmd_sample;
pub use spectra::cmd_spectra;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Sample,
    Fit,
    Predict,
    Evaluate,
    EstimateR2,
    Spectra,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Fit => "fit",
            Command::Predict => "predict",
            Command::Evaluate => "evaluate",
            Command::EstimateR2 => "estimate-r2",
            Command::Spectra => "spectra",
        }
    }

    /// Name of the summary file in the output directory.
    pub fn summary_file(self) -> &'static str {
        match self {
            Command::Sample => "sample.json",
            Command::Fit => "fit.json",
            Command::Predict => "predict.json",
            Command::Evaluate => "results.json",
            Command::EstimateR2 => "estimate_r2.json",
            Command::Spectra => "spectra.json",
        }
    }
}

/// Result of a command: the summary and where it was written.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Value,
    pub summary_path: PathBuf,
}

pub fn run_command(command: Command, cfg: &ExperimentConfig) -> CliResult<Outcome> {
    crate::output::ensure_dir(&cfg.output_dir)?;
    let summary = match command {
        Command::Sample => cmd_sample(cfg)?,
        Command::Fit => cmd_fit(cfg)?,
        Command::Predict => cmd_predict(cfg)?,
        Command::Evaluate => cmd_evaluate(cfg)?,
        Command::EstimateR2 => cmd_estimate_r2(cfg)?,
        Command::Spectra => cmd_spectra(cfg)?,
    };
    let summary = crate::output::summary(command.name(), cfg, summary);
    let summary_path = crate::output::write_json(&cfg.output_dir.join(command.summary_file()), &summary)?;
    Ok(Outcome { summary, summary_path })
}
