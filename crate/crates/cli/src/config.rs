//! Experiment configuration, read from JSON.
//!
//! Every struct rejects unknown keys. Omitted sections fall back to the
//! defaults documented on each field. The resolved configuration (after
//! command-line overrides) is echoed into every JSON summary.

use std::path::{Path, PathBuf};

use gmrf_core::algorithms::{Algorithm, PropagationBudget, Solver};
use gmrf_core::eval::{CvPlan, FilterKind};
use gmrf_core::gmrf::{FitConfig, LikelihoodMethod, Optimizer, StochasticConfig};
use gmrf_core::linalg::SlqConfig;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub input: InputSpec,
    /// Outcome column(s). Omitted: the last attribute column.
    #[serde(default)]
    pub outcome: OutcomeSpec,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default = "all_algorithms")]
    pub algorithms: Vec<Algorithm>,
    /// Fixed hyperparameters. When present, cross-validation is skipped.
    #[serde(default)]
    pub hyperparameters: Option<FixedHyperparameters>,
    #[serde(default)]
    pub cv: CvPlan,
    #[serde(default)]
    pub propagation: PropagationSettings,
    #[serde(default)]
    pub fit: FitSettings,
    #[serde(default)]
    pub estimate: EstimateSettings,
    #[serde(default)]
    pub spectra: SpectraSettings,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn all_algorithms() -> Vec<Algorithm> {
    Algorithm::ALL.to_vec()
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputSpec {
    Synthetic(SyntheticInput),
    Files(FileInput),
}

/// Watts-Strogatz topology with attributes sampled from the model.
///
/// Parameters are either drawn at random at scale `h0`, or given explicitly
/// through `coupling` (row-major `(p+1) × (p+1)`) and `homophily`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticInput {
    pub n: usize,
    pub avg_degree: usize,
    pub rewire_prob: f64,
    pub p: usize,
    #[serde(default)]
    pub h0: Option<f64>,
    #[serde(default)]
    pub coupling: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub homophily: Option<Vec<f64>>,
    /// Seed of the topology alone, so samples can vary on a fixed graph.
    /// Omitted: derived from the experiment seed.
    #[serde(default)]
    pub graph_seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileInput {
    /// `src,dst[,weight]` rows.
    pub edges: PathBuf,
    /// `node_id,<attribute columns…>` with a header row.
    pub attributes: PathBuf,
    /// Model parameters in the JSON layout written by `fit` and `sample`.
    #[serde(default)]
    pub params: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OutcomeSpec {
    #[default]
    Last,
    /// A column name, or `"*"` for every column in turn.
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SplitConfig {
    /// Fraction of nodes with observed outcomes.
    pub train_fraction: f64,
    pub repeats: usize,
    /// Train on a second graph, test on the input graph.
    pub inductive: Option<InductiveSpec>,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self { train_fraction: 0.3, repeats: 10, inductive: None }
    }
}

/// Source of the training graph in inductive mode. With synthetic input the
/// files may be omitted, and a second graph is drawn from the same model.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InductiveSpec {
    #[serde(default)]
    pub edges: Option<PathBuf>,
    #[serde(default)]
    pub attributes: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedHyperparameters {
    #[serde(default = "one")]
    pub omega: f64,
    #[serde(default = "two")]
    pub k: usize,
    #[serde(default)]
    pub rp_omega: Option<f64>,
}

fn one() -> f64 {
    1.0
}

fn two() -> usize {
    2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverName {
    #[default]
    Cg,
    FixedPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PropagationSettings {
    pub solver: SolverName,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for PropagationSettings {
    fn default() -> Self {
        Self { solver: SolverName::Cg, max_iterations: 1000, tolerance: 1e-9 }
    }
}

impl PropagationSettings {
    pub fn budget(&self) -> PropagationBudget {
        PropagationBudget {
            max_iterations: self.max_iterations,
            rel_change_tolerance: self.tolerance,
            solver: match self.solver {
                SolverName::Cg => Solver::ConjugateGradient,
                SolverName::FixedPoint => Solver::FixedPoint,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodName {
    #[default]
    Auto,
    Dense,
    Spectral,
    Stochastic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerName {
    #[default]
    Adamw,
    GradientDescent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitSettings {
    pub restarts: usize,
    pub steps: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub init_spread: f64,
    pub method: MethodName,
    pub optimizer: OptimizerName,
    /// Stochastic path only.
    pub probes: usize,
    pub lanczos_steps: usize,
}

impl Default for FitSettings {
    fn default() -> Self {
        let core = FitConfig::default();
        let slq = SlqConfig::default();
        Self {
            restarts: core.restarts,
            steps: core.steps,
            learning_rate: core.learning_rate,
            weight_decay: core.weight_decay,
            init_spread: core.init_spread,
            method: MethodName::Auto,
            optimizer: OptimizerName::Adamw,
            probes: slq.num_probes,
            lanczos_steps: slq.lanczos_steps,
        }
    }
}

impl FitSettings {
    pub fn to_core(&self, seed: u64) -> FitConfig {
        let method = match self.method {
            MethodName::Auto => LikelihoodMethod::Auto,
            MethodName::Dense => LikelihoodMethod::Dense,
            MethodName::Spectral => LikelihoodMethod::Spectral,
            MethodName::Stochastic => LikelihoodMethod::Stochastic(StochasticConfig {
                slq: SlqConfig { num_probes: self.probes, lanczos_steps: self.lanczos_steps, seed },
                ..Default::default()
            }),
        };
        FitConfig {
            restarts: self.restarts,
            steps: self.steps,
            learning_rate: self.learning_rate,
            weight_decay: self.weight_decay,
            seed,
            method,
            optimizer: match self.optimizer {
                OptimizerName::Adamw => Optimizer::AdamW,
                OptimizerName::GradientDescent => Optimizer::GradientDescent,
            },
            init_spread: self.init_spread,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamsSource {
    /// Known parameters if the input has them, otherwise a fit.
    #[default]
    Auto,
    Known,
    Fit,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateSettings {
    pub params: ParamsSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectraSettings {
    pub points: usize,
    /// Omitted: LGC at ω ∈ {0.1, 1, 10, 100} and SGC at K ∈ {1, 2, 3, 4}.
    pub filters: Option<Vec<FilterKind>>,
    /// Degree assumed by the default SGC filters. Omitted: the mean degree
    /// of the input graph.
    pub degree: Option<f64>,
}

impl Default for SpectraSettings {
    fn default() -> Self {
        Self { points: 201, filters: None, degree: None }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if let InputSpec::Synthetic(s) = &self.input {
            if s.n < 2 {
                return bad(format!("synthetic n must be at least 2, got {}", s.n));
            }
            let explicit = s.coupling.is_some() || s.homophily.is_some();
            match (s.h0, explicit) {
                (Some(_), true) => return bad("give either h0 or coupling/homophily, not both".into()),
                (None, false) => return bad("synthetic input needs h0 or coupling and homophily".into()),
                (Some(h0), false) if !(h0.is_finite() && h0 >= 0.0) => return bad(format!("invalid h0 {h0}")),
                (None, true) if s.coupling.is_none() || s.homophily.is_none() => {
                    return bad("coupling and homophily must be given together".into())
                }
                _ => {}
            }
        }
        if !(self.split.train_fraction > 0.0 && self.split.train_fraction < 1.0) {
            return bad(format!("train_fraction must lie in (0, 1), got {}", self.split.train_fraction));
        }
        if self.split.repeats == 0 {
            return bad("split.repeats must be positive".into());
        }
        if self.algorithms.is_empty() {
            return bad("algorithm list is empty".into());
        }
        if self.split.inductive.is_some() {
            if let Some(a) = self.algorithms.iter().find(|a| !a.uses_features() || matches!(a, Algorithm::LgcRp | Algorithm::SgcRp)) {
                return bad(format!("{a} needs labels in the test graph and cannot run inductively"));
            }
        }
        if self.spectra.points < 2 {
            return bad("spectra.points must be at least 2".into());
        }
        Ok(())
    }
}
