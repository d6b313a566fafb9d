use rand::seq::SliceRandom;

use crate::algorithms::{predict, tune_threshold, classify_by_threshold, Algorithm, FeatureCache, Hyperparameters};
use crate::error::{Error, Result};
use crate::graph::NodeIndexSet;
use crate::parallel;
use crate::rng::rng_from_seed;

use super::metrics::{f1_score, r_squared};
use super::split::SplitSpec;

/// Validation score used to rank grid points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    R2,
    /// F1 of class 1 after tuning the score threshold on the fold itself.
    F1,
}

impl Metric {
    pub fn score(self, predicted: &[f64], actual: &[f64]) -> Result<f64> {
        match self {
            Metric::R2 => r_squared(predicted, actual),
            Metric::F1 => {
                let t = tune_threshold(predicted, actual)?;
                f1_score(&classify_by_threshold(predicted, t), actual)
            }
        }
    }
}

/// `count` log-spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..count)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
                .collect()
        }
    }
}

/// K-fold search over the hyperparameter grid on the labeled nodes.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CvPlan {
    pub folds: usize,
    pub omega_grid: Vec<f64>,
    pub k_grid: Vec<usize>,
    pub seed: u64,
    pub metric: Metric,
}

impl Default for CvPlan {
    fn default() -> Self {
        Self {
            folds: 5,
            omega_grid: log_grid(0.1, 100.0, 13),
            k_grid: (0..=4).collect(),
            seed: 0,
            metric: Metric::R2,
        }
    }
}

impl CvPlan {
    fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::InvalidArgument("cross-validation needs at least 2 folds".into()));
        }
        if self.omega_grid.is_empty() || self.k_grid.is_empty() {
            return Err(Error::InvalidArgument("hyperparameter grids must be nonempty".into()));
        }
        if self.omega_grid.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument("omega grid values must be finite and nonnegative".into()));
        }
        Ok(())
    }

    /// Grid points for `algorithm` in tie-breaking order: weaker smoothing
    /// first.
    pub fn grid(&self, algorithm: Algorithm) -> Vec<Hyperparameters> {
        let mut omegas = self.omega_grid.clone();
        omegas.sort_by(f64::total_cmp);
        omegas.dedup();
        let mut ks = self.k_grid.clone();
        ks.sort_unstable();
        ks.dedup();
        let base = Hyperparameters::default();
        let point = |omega: f64, k: usize, rp_omega: Option<f64>| Hyperparameters { omega, k, rp_omega };
        match algorithm {
            Algorithm::Lr => vec![base],
            Algorithm::Lp | Algorithm::Lgc => omegas.iter().map(|&w| point(w, base.k, None)).collect(),
            Algorithm::Sgc => ks.iter().map(|&k| point(base.omega, k, None)).collect(),
            Algorithm::LgcRp => omegas
                .iter()
                .flat_map(|&w| omegas.iter().map(move |&r| point(w, base.k, Some(r))))
                .collect(),
            Algorithm::SgcRp => ks
                .iter()
                .flat_map(|&k| omegas.iter().map(move |&r| point(r, k, Some(r))))
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GridScore {
    pub hyper: Hyperparameters,
    /// Mean validation score over the folds that could be scored.
    pub score: f64,
    pub fold_scores: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CvResult {
    pub best: Hyperparameters,
    pub best_score: f64,
    pub grid: Vec<GridScore>,
}

/// Partitions the labeled nodes into `folds` near-equal random groups.
pub fn fold_assignment(labeled: &NodeIndexSet, folds: usize, seed: u64) -> Vec<NodeIndexSet> {
    let mut nodes = labeled.as_slice().to_vec();
    nodes.shuffle(&mut rng_from_seed(seed));
    (0..folds)
        .map(|f| {
            let part = nodes.iter().skip(f).step_by(folds).copied().collect();
            NodeIndexSet::new(part, labeled.universe()).expect("subset of a valid set")
        })
        .collect()
}

/// Selects hyperparameters for `algorithm` by k-fold cross-validation over
/// the labeled nodes. Validation labels are removed from the split handed to
/// the predictor, so propagation never sees them.
pub fn cross_validate(cache: &FeatureCache<'_>, split: &SplitSpec, algorithm: Algorithm, plan: &CvPlan) -> Result<CvResult> {
    plan.validate()?;
    if split.labeled().len() < plan.folds {
        return Err(Error::InvalidArgument(format!(
            "{} labeled nodes cannot fill {} folds",
            split.labeled().len(),
            plan.folds
        )));
    }
    let folds = fold_assignment(split.labeled(), plan.folds, plan.seed);
    let fold_splits = folds
        .iter()
        .map(|val| {
            let train: Vec<usize> = split.labeled().iter().copied().filter(|&u| !val.contains(u)).collect();
            let train = NodeIndexSet::new(train, split.num_nodes())?;
            let inner = split.restrict_labeled(&train)?;
            // Positions of the validation nodes within the inner unlabeled order.
            let positions: Vec<usize> = val
                .iter()
                .map(|u| inner.unlabeled().as_slice().binary_search(u).expect("validation node is unlabeled"))
                .collect();
            let truth: Vec<f64> = val
                .iter()
                .map(|u| split.y_labeled()[split.labeled().as_slice().binary_search(u).expect("labeled")])
                .collect();
            Ok((inner, positions, truth))
        })
        .collect::<Result<Vec<_>>>()?;

    let grid = plan.grid(algorithm);
    let jobs = grid.len() * fold_splits.len();
    let scores: Vec<Result<Option<f64>>> = parallel::map_indexed(jobs, |job| {
        let (gi, fi) = (job / fold_splits.len(), job % fold_splits.len());
        let (inner, positions, truth) = &fold_splits[fi];
        let pred = predict(cache, inner, algorithm, &grid[gi])?;
        let val: Vec<f64> = positions.iter().map(|&i| pred.values[i]).collect();
        match plan.metric.score(&val, truth) {
            Ok(s) => Ok(Some(s)),
            Err(Error::ZeroVariance) => Ok(None),
            Err(e) => Err(e),
        }
    });
    let scores = scores.into_iter().collect::<Result<Vec<_>>>()?;

    let mut table = Vec::with_capacity(grid.len());
    for (gi, hyper) in grid.into_iter().enumerate() {
        let fold_scores = scores[gi * fold_splits.len()..(gi + 1) * fold_splits.len()].to_vec();
        let valid: Vec<f64> = fold_scores.iter().flatten().copied().collect();
        if valid.is_empty() {
            return Err(Error::ZeroVariance);
        }
        if valid.len() < fold_scores.len() && gi == 0 {
            log::warn!("{} of {} folds skipped: constant validation targets", fold_scores.len() - valid.len(), fold_scores.len());
        }
        let score = valid.iter().sum::<f64>() / valid.len() as f64;
        table.push(GridScore { hyper, score, fold_scores });
    }
    let mut best = 0;
    for (i, row) in table.iter().enumerate() {
        if row.score > table[best].score {
            best = i;
        }
    }
    Ok(CvResult { best: table[best].hyper, best_score: table[best].score, grid: table })
}
