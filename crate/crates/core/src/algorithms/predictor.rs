use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use nalgebra::DMatrix;

use super::lp::{label_propagation, residual_propagation};
use super::regression::{ols, RegressionCoefficients};
use super::smoothing::{sgc_features, smooth_features, Smoothed};
use super::{PropagationBudget, SmoothingParam};
use crate::error::{check_len, Error, Result};
use crate::eval::SplitSpec;
use crate::graph::Graph;
use crate::linalg::dense::submatrix;

/// Predictor identifiers, named as in result tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    Lr,
    Lp,
    Lgc,
    Sgc,
    LgcRp,
    SgcRp,
}

impl Algorithm {
    pub const ALL: [Algorithm; 6] = [Self::Lr, Self::Lp, Self::Lgc, Self::Sgc, Self::LgcRp, Self::SgcRp];

    pub fn name(self) -> &'static str {
        match self {
            Self::Lr => "LR",
            Self::Lp => "LP",
            Self::Lgc => "LGC",
            Self::Sgc => "SGC",
            Self::LgcRp => "LGC/RP",
            Self::SgcRp => "SGC/RP",
        }
    }

    pub fn uses_features(self) -> bool {
        self != Self::Lp
    }

    /// Whether `ω` is a hyperparameter of the feature step or propagation.
    pub fn uses_omega(self) -> bool {
        matches!(self, Self::Lp | Self::Lgc | Self::LgcRp | Self::SgcRp)
    }

    pub fn uses_k(self) -> bool {
        matches!(self, Self::Sgc | Self::SgcRp)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace(['_', '-'], "/");
        Self::ALL
            .into_iter()
            .find(|a| a.name() == norm || a.name().replace('/', "") == norm)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm '{s}'")))
    }
}

impl serde::Serialize for Algorithm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> serde::Deserialize<'de> for Algorithm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Hyperparameters of one prediction. `omega` drives LP and LGC smoothing,
/// `k` the SGC depth; `rp_omega` overrides the residual propagation level
/// (defaults to `omega`).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Hyperparameters {
    pub omega: f64,
    pub k: usize,
    pub rp_omega: Option<f64>,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self { omega: 1.0, k: 2, rp_omega: None }
    }
}

impl Hyperparameters {
    pub fn with_omega(omega: f64) -> Self {
        Self { omega, ..Default::default() }
    }

    fn smoothing(&self) -> Result<SmoothingParam> {
        SmoothingParam::from_omega(self.omega)
    }

    fn residual_smoothing(&self) -> Result<SmoothingParam> {
        SmoothingParam::from_omega(self.rp_omega.unwrap_or(self.omega))
    }
}

/// Predictions on the unlabeled nodes (ascending node order).
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub values: Vec<f64>,
    /// Regression coefficients, for feature-based predictors.
    pub beta: Option<Vec<f64>>,
    /// False if some propagation ran out of iterations.
    pub converged: bool,
}

/// Shares smoothed features across predictions on one graph.
///
/// Smoothing depends only on the features and hyperparameter, never on
/// labels, so cross-validation folds reuse it.
pub struct FeatureCache<'a> {
    graph: &'a Graph,
    features: &'a DMatrix<f64>,
    budget: PropagationBudget,
    smoothed: Mutex<HashMap<u64, Arc<Smoothed>>>,
    sgc: Mutex<HashMap<usize, Arc<DMatrix<f64>>>>,
}

impl<'a> FeatureCache<'a> {
    pub fn new(graph: &'a Graph, features: &'a DMatrix<f64>, budget: PropagationBudget) -> Result<Self> {
        check_len("feature rows", graph.num_nodes(), features.nrows())?;
        budget.validate()?;
        Ok(Self {
            graph,
            features,
            budget,
            smoothed: Mutex::new(HashMap::new()),
            sgc: Mutex::new(HashMap::new()),
        })
    }

    pub fn graph(&self) -> &'a Graph {
        self.graph
    }

    pub fn features(&self) -> &'a DMatrix<f64> {
        self.features
    }

    pub fn budget(&self) -> &PropagationBudget {
        &self.budget
    }

    pub fn smoothed(&self, s: SmoothingParam) -> Result<Arc<Smoothed>> {
        let key = s.omega().to_bits();
        if let Some(hit) = self.smoothed.lock().expect("cache lock").get(&key) {
            return Ok(hit.clone());
        }
        let value = Arc::new(smooth_features(self.graph, self.features, s, &self.budget)?);
        Ok(self.smoothed.lock().expect("cache lock").entry(key).or_insert(value).clone())
    }

    pub fn sgc(&self, k: usize) -> Result<Arc<DMatrix<f64>>> {
        if let Some(hit) = self.sgc.lock().expect("cache lock").get(&k) {
            return Ok(hit.clone());
        }
        let value = Arc::new(sgc_features(self.graph, self.features, k)?);
        Ok(self.sgc.lock().expect("cache lock").entry(k).or_insert(value).clone())
    }
}

/// Fits `β` on the labeled rows and returns it with `Fβ` on every node.
fn regress(features: &DMatrix<f64>, split: &SplitSpec) -> Result<(RegressionCoefficients, Vec<f64>)> {
    let cols: Vec<usize> = (0..features.ncols()).collect();
    let fl = submatrix(features, split.labeled().as_slice(), &cols);
    let beta = ols(&fl, split.y_labeled())?;
    let fitted = beta.predict(features)?;
    Ok((beta, fitted))
}

fn feature_prediction(features: &DMatrix<f64>, split: &SplitSpec, converged: bool) -> Result<Prediction> {
    let (beta, fitted) = regress(features, split)?;
    Ok(Prediction {
        values: split.unlabeled().gather(&fitted),
        beta: Some(beta.beta),
        converged,
    })
}

fn with_residuals(
    g: &Graph,
    features: &DMatrix<f64>,
    split: &SplitSpec,
    s: SmoothingParam,
    budget: &PropagationBudget,
    converged: bool,
) -> Result<Prediction> {
    let (beta, fitted) = regress(features, split)?;
    let rp = residual_propagation(g, &fitted, split, s, budget)?;
    Ok(Prediction {
        values: rp.values,
        beta: Some(beta.beta),
        converged: converged && rp.converged,
    })
}

fn check_split(g: &Graph, x: &DMatrix<f64>, split: &SplitSpec) -> Result<()> {
    split.check_graph(g)?;
    check_len("feature rows", g.num_nodes(), x.nrows())
}

/// Plain linear regression on the raw features.
pub fn linear_regression_predict(x: &DMatrix<f64>, split: &SplitSpec) -> Result<Prediction> {
    check_len("feature rows", split.num_nodes(), x.nrows())?;
    feature_prediction(x, split, true)
}

/// Regression on `X̄ = (I+ωN)^{-1} X`.
pub fn lgc_predict(
    g: &Graph,
    x: &DMatrix<f64>,
    split: &SplitSpec,
    s: SmoothingParam,
    budget: &PropagationBudget,
) -> Result<Prediction> {
    check_split(g, x, split)?;
    let sm = smooth_features(g, x, s, budget)?;
    feature_prediction(&sm.values, split, sm.converged)
}

/// Regression on `S̃^K X`.
pub fn sgc_predict(g: &Graph, x: &DMatrix<f64>, split: &SplitSpec, k: usize) -> Result<Prediction> {
    check_split(g, x, split)?;
    feature_prediction(&sgc_features(g, x, k)?, split, true)
}

/// LGC followed by propagation of its labeled residuals, both at level `s`.
pub fn lgc_rp_predict(
    g: &Graph,
    x: &DMatrix<f64>,
    split: &SplitSpec,
    s: SmoothingParam,
    budget: &PropagationBudget,
) -> Result<Prediction> {
    check_split(g, x, split)?;
    let sm = smooth_features(g, x, s, budget)?;
    with_residuals(g, &sm.values, split, s, budget, sm.converged)
}

/// Runs `algorithm` on the cached graph and features.
pub fn predict(cache: &FeatureCache<'_>, split: &SplitSpec, algorithm: Algorithm, hyper: &Hyperparameters) -> Result<Prediction> {
    let g = cache.graph();
    check_split(g, cache.features(), split)?;
    let budget = cache.budget();
    match algorithm {
        Algorithm::Lr => feature_prediction(cache.features(), split, true),
        Algorithm::Lp => {
            let p = label_propagation(g, split, hyper.smoothing()?, budget)?;
            Ok(Prediction { values: p.values, beta: None, converged: p.converged })
        }
        Algorithm::Lgc => {
            let sm = cache.smoothed(hyper.smoothing()?)?;
            feature_prediction(&sm.values, split, sm.converged)
        }
        Algorithm::Sgc => feature_prediction(&*cache.sgc(hyper.k)?, split, true),
        Algorithm::LgcRp => {
            let sm = cache.smoothed(hyper.smoothing()?)?;
            with_residuals(g, &sm.values, split, hyper.residual_smoothing()?, budget, sm.converged)
        }
        Algorithm::SgcRp => {
            let f = cache.sgc(hyper.k)?;
            with_residuals(g, &f, split, hyper.residual_smoothing()?, budget, true)
        }
    }
}
