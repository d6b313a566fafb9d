//! Config-driven experiment runner for the Gaussian MRF graph learning
//! library: sampling, fitting, prediction, evaluation, accuracy estimation
//! and filter spectra.

pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod output;

pub use commands::{run_command, Command};
pub use config::ExperimentConfig;
pub use error::{CliError, CliResult};
