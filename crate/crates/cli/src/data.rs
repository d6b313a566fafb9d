//! Turning a configuration into graphs, attributes and splits.
//!
//! Randomness derives from the experiment seed `s` through
//! `derive_seed(s, stream)` with one stream per purpose (see [`stream`]).
//! Split `r` of a repeat loop uses `derive_seed(derive_seed(s, SPLIT), r)`,
//! shared by every outcome and algorithm so comparisons are paired.

use gmrf_core::algorithms::{
    classify_by_threshold, predict, tune_threshold, Algorithm, FeatureCache, Hyperparameters, Prediction,
};
use gmrf_core::eval::{cross_validate, f1_score, fold_assignment, inductive_union, r_squared, random_split, CvPlan, Metric, SplitKind, SplitSpec};
use gmrf_core::gmrf::{sample, synthetic_params, AttributeMatrix, GmrfParams};
use gmrf_core::graph::{load_attributes, load_edge_list, watts_strogatz, Graph, NodeIndexSet};
use gmrf_core::rng::derive_seed;
use nalgebra::{DMatrix, DVector};

use crate::config::{ExperimentConfig, InputSpec, OutcomeSpec, SyntheticInput};
use crate::error::{CliError, CliResult};

pub mod stream {
    pub const GRAPH: u64 = 1;
    pub const PARAMS: u64 = 2;
    pub const SAMPLE: u64 = 3;
    pub const TRAIN_GRAPH: u64 = 4;
    pub const TRAIN_SAMPLE: u64 = 5;
    pub const FIT: u64 = 6;
    pub const SPLIT: u64 = 10;
    pub const FOLDS: u64 = 11;
    pub const TEST_SPLIT: u64 = 12;
}

/// Input graph and attributes, plus the training graph in inductive mode.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: Graph,
    pub attributes: AttributeMatrix,
    /// Model parameters when known, in the attribute column order.
    pub params: Option<GmrfParams>,
    pub train: Option<(Graph, AttributeMatrix)>,
}

pub fn synthetic_graph(s: &SyntheticInput, seed: u64) -> CliResult<Graph> {
    let graph_seed = s.graph_seed.unwrap_or_else(|| derive_seed(seed, stream::GRAPH));
    Ok(watts_strogatz(s.n, s.avg_degree, s.rewire_prob, graph_seed)?)
}

pub fn synthetic_model(s: &SyntheticInput, seed: u64) -> CliResult<GmrfParams> {
    if let Some(h0) = s.h0 {
        return Ok(synthetic_params(s.p, h0, derive_seed(seed, stream::PARAMS))?);
    }
    let (rows, h) = (s.coupling.as_ref().expect("validated"), s.homophily.as_ref().expect("validated"));
    let m = s.p + 1;
    if rows.len() != m || rows.iter().any(|r| r.len() != m) || h.len() != m {
        return Err(CliError::Config(format!("coupling must be {m}x{m} and homophily of length {m} for p = {}", s.p)));
    }
    let coupling = DMatrix::from_fn(m, m, |i, j| rows[i][j]);
    Ok(GmrfParams::new(coupling, DVector::from_column_slice(h))?)
}

fn require_file(path: &std::path::Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Data(format!("missing input file {}", path.display())))
    }
}

pub fn load_files(edges: &std::path::Path, attributes: &std::path::Path) -> CliResult<(Graph, AttributeMatrix)> {
    require_file(edges)?;
    require_file(attributes)?;
    let g = load_edge_list(edges)?;
    let a = load_attributes(attributes, &g)?;
    Ok((g, a))
}

/// Builds the dataset. In synthetic mode attributes are sampled from the
/// model and left uncentered; file attributes are centered on load.
pub fn load_dataset(cfg: &ExperimentConfig) -> CliResult<Dataset> {
    let seed = cfg.seed;
    match &cfg.input {
        InputSpec::Synthetic(s) => {
            let graph = synthetic_graph(s, seed)?;
            let params = synthetic_model(s, seed)?;
            let attributes = sample(&params, &graph, derive_seed(seed, stream::SAMPLE))?;
            let train = match &cfg.split.inductive {
                None => None,
                Some(ind) if ind.edges.is_none() && ind.attributes.is_none() => {
                    let tg = watts_strogatz(s.n, s.avg_degree, s.rewire_prob, derive_seed(seed, stream::TRAIN_GRAPH))?;
                    let ta = sample(&params, &tg, derive_seed(seed, stream::TRAIN_SAMPLE))?;
                    Some((tg, ta))
                }
                Some(ind) => Some(load_inductive(ind)?),
            };
            Ok(Dataset { graph, attributes, params: Some(params), train })
        }
        InputSpec::Files(f) => {
            let (graph, attributes) = load_files(&f.edges, &f.attributes)?;
            let params = match &f.params {
                Some(path) => {
                    require_file(path)?;
                    let p = GmrfParams::load(path)?;
                    if p.num_attributes() != attributes.num_attributes() {
                        return Err(CliError::Data(format!(
                            "parameters describe {} attributes but the table has {}",
                            p.num_attributes(),
                            attributes.num_attributes()
                        )));
                    }
                    Some(p)
                }
                None => None,
            };
            let train = match &cfg.split.inductive {
                None => None,
                Some(ind) => Some(load_inductive(ind)?),
            };
            Ok(Dataset { graph, attributes, params, train })
        }
    }
}

fn load_inductive(ind: &crate::config::InductiveSpec) -> CliResult<(Graph, AttributeMatrix)> {
    match (&ind.edges, &ind.attributes) {
        (Some(e), Some(a)) => load_files(e, a),
        _ => Err(CliError::Config("inductive mode with file input needs both edges and attributes".into())),
    }
}

/// Column indices named by the outcome setting.
pub fn outcome_columns(spec: &OutcomeSpec, names: &[String]) -> CliResult<Vec<usize>> {
    let find = |name: &str| {
        names
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| CliError::Config(format!("no attribute column named `{name}`")))
    };
    match spec {
        OutcomeSpec::Last => Ok(vec![names.len() - 1]),
        OutcomeSpec::One(s) if s == "*" => Ok((0..names.len()).collect()),
        OutcomeSpec::One(s) => Ok(vec![find(s)?]),
        OutcomeSpec::Many(list) if list.is_empty() => Err(CliError::Config("outcome list is empty".into())),
        OutcomeSpec::Many(list) => list.iter().map(|s| find(s)).collect(),
    }
}

/// Reorders parameters the way [`AttributeMatrix::with_outcome_index`]
/// reorders columns.
pub fn params_with_outcome(params: &GmrfParams, k: usize) -> CliResult<GmrfParams> {
    let m = params.num_attributes();
    let order: Vec<usize> = (0..m).filter(|&i| i != k).chain(std::iter::once(k)).collect();
    let h = params.coupling();
    Ok(GmrfParams::new(
        DMatrix::from_fn(m, m, |i, j| h[(order[i], order[j])]),
        DVector::from_fn(m, |i, _| params.homophily()[order[i]]),
    )?)
}

/// One prediction problem: a graph, its features and the chosen outcome.
#[derive(Debug, Clone)]
pub struct Task {
    pub outcome_name: String,
    pub graph: Graph,
    pub features: DMatrix<f64>,
    pub outcome: Vec<f64>,
    /// Known parameters with the outcome last.
    pub params: Option<GmrfParams>,
    /// Size of the training graph placed before the test graph (inductive),
    /// zero otherwise.
    pub train_nodes: usize,
}

/// Node sets of one repeat.
#[derive(Debug, Clone)]
pub struct SplitCase {
    pub split: SplitSpec,
    /// Scored nodes (ascending); all of `U` in transductive mode.
    pub eval_nodes: Vec<usize>,
    /// Positions of `eval_nodes` within `U`.
    pub eval_positions: Vec<usize>,
}

impl SplitCase {
    pub fn eval_targets(&self, task: &Task) -> Vec<f64> {
        self.eval_nodes.iter().map(|&u| task.outcome[u]).collect()
    }

    pub fn eval_values(&self, prediction_on_u: &[f64]) -> Vec<f64> {
        self.eval_positions.iter().map(|&i| prediction_on_u[i]).collect()
    }
}

impl Task {
    pub fn new(data: &Dataset, column: usize) -> CliResult<Self> {
        let attrs = data.attributes.clone().with_outcome_index(column);
        let params = data.params.as_ref().map(|p| params_with_outcome(p, column)).transpose()?;
        let outcome_name = attrs.names().last().cloned().unwrap_or_default();
        match &data.train {
            None => Ok(Self {
                outcome_name,
                graph: data.graph.clone(),
                features: attrs.features(),
                outcome: attrs.outcome(),
                params,
                train_nodes: 0,
            }),
            Some((tg, ta)) => {
                let name = &data.attributes.names()[column];
                let ta = ta.clone().with_outcome(name).map_err(|_| {
                    CliError::Data(format!("training attributes lack the outcome column `{name}`"))
                })?;
                if ta.names() != attrs.names() {
                    return Err(CliError::Data("training and test attribute columns differ".into()));
                }
                let (graph, _) = inductive_union(tg, &data.graph);
                let features = DMatrix::from_fn(graph.num_nodes(), attrs.p(), |u, i| {
                    if u < tg.num_nodes() {
                        ta.values()[(u, i)]
                    } else {
                        attrs.values()[(u - tg.num_nodes(), i)]
                    }
                });
                let mut outcome = ta.outcome();
                outcome.extend(attrs.outcome());
                Ok(Self { outcome_name, graph, features, outcome, params, train_nodes: tg.num_nodes() })
            }
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.graph.num_nodes()
    }

    /// Labeled set and scored nodes of repeat `repeat`.
    pub fn split_case(&self, train_fraction: f64, seed: u64, repeat: usize) -> CliResult<SplitCase> {
        let n = self.num_nodes();
        let split_seed = derive_seed(derive_seed(seed, stream::SPLIT), repeat as u64);
        if self.train_nodes == 0 {
            let labeled = random_split(n, train_fraction, split_seed)?;
            let split = SplitSpec::from_outcome(labeled, &self.outcome)?;
            let eval_nodes = split.unlabeled().as_slice().to_vec();
            let eval_positions = (0..eval_nodes.len()).collect();
            return Ok(SplitCase { split, eval_nodes, eval_positions });
        }
        let offset = self.train_nodes;
        let train = random_split(offset, train_fraction, split_seed)?;
        let labeled = NodeIndexSet::new(train.as_slice().to_vec(), n)?;
        let split = SplitSpec::from_outcome(labeled, &self.outcome)?.with_kind(SplitKind::Inductive);
        // The test graph keeps its transductive test set, so both modes
        // score the same nodes.
        let test_seed = derive_seed(derive_seed(seed, stream::TEST_SPLIT), repeat as u64);
        let held = random_split(n - offset, train_fraction, test_seed)?;
        let eval_nodes: Vec<usize> = held.complement().iter().map(|&u| u + offset).collect();
        let u = split.unlabeled().as_slice();
        let eval_positions = eval_nodes.iter().map(|v| u.binary_search(v).expect("test nodes are unlabeled")).collect();
        Ok(SplitCase { split, eval_nodes, eval_positions })
    }
}

/// Result of one algorithm on one split.
#[derive(Debug, Clone)]
pub struct Run {
    pub hyper: Hyperparameters,
    /// Best validation score, when hyperparameters were cross-validated.
    pub cv_score: Option<f64>,
    pub prediction: Prediction,
    /// Decision threshold for F1 scoring.
    pub threshold: Option<f64>,
    /// Test score on the scored nodes.
    pub score: f64,
}

pub fn fold_seed(cfg: &ExperimentConfig, repeat: usize) -> u64 {
    derive_seed(derive_seed(cfg.seed, stream::FOLDS) ^ cfg.cv.seed, repeat as u64)
}

/// Tunes (unless fixed), predicts and scores `algorithm` on one split.
pub fn run_algorithm(
    cfg: &ExperimentConfig,
    cache: &FeatureCache<'_>,
    task: &Task,
    case: &SplitCase,
    algorithm: Algorithm,
    repeat: usize,
) -> CliResult<Run> {
    let plan = CvPlan { seed: fold_seed(cfg, repeat), ..cfg.cv.clone() };
    let (hyper, cv_score) = match cfg.hyperparameters {
        Some(f) => (Hyperparameters { omega: f.omega, k: f.k, rp_omega: f.rp_omega }, None),
        None => {
            let cv = cross_validate(cache, &case.split, algorithm, &plan)?;
            (cv.best, Some(cv.best_score))
        }
    };
    let prediction = predict(cache, &case.split, algorithm, &hyper)?;
    let predicted = case.eval_values(&prediction.values);
    let actual = case.eval_targets(task);
    let (score, threshold) = match plan.metric {
        Metric::R2 => (r_squared(&predicted, &actual)?, None),
        Metric::F1 => {
            let t = out_of_fold_threshold(cache, &case.split, algorithm, &hyper, &plan)?;
            (f1_score(&classify_by_threshold(&predicted, t), &actual)?, Some(t))
        }
    };
    Ok(Run { hyper, cv_score, prediction, threshold, score })
}

/// Threshold maximizing F1 on out-of-fold predictions over the labeled
/// nodes, so the test labels never influence it.
fn out_of_fold_threshold(
    cache: &FeatureCache<'_>,
    split: &SplitSpec,
    algorithm: Algorithm,
    hyper: &Hyperparameters,
    plan: &CvPlan,
) -> CliResult<f64> {
    let labeled = split.labeled();
    let (mut scores, mut labels) = (Vec::new(), Vec::new());
    for fold in fold_assignment(labeled, plan.folds.max(2), plan.seed) {
        let keep = NodeIndexSet::new(labeled.iter().copied().filter(|&u| !fold.contains(u)).collect(), labeled.universe())?;
        if keep.is_empty() || fold.is_empty() {
            continue;
        }
        let sub = split.restrict_labeled(&keep)?;
        let pred = predict(cache, &sub, algorithm, hyper)?;
        let u = sub.unlabeled().as_slice();
        for &v in fold.iter() {
            scores.push(pred.values[u.binary_search(&v).expect("held-out node is unlabeled")]);
            labels.push(split.y_labeled()[labeled.as_slice().binary_search(&v).expect("labeled")]);
        }
    }
    Ok(tune_threshold(&scores, &labels)?)
}
