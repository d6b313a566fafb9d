use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::split::SplitSpec;
use crate::algorithms::Algorithm;
use crate::error::{check_len, Error, Result};
use crate::gmrf::{dense_precision, AttributeMatrix, GmrfParams, DEFAULT_DENSE_THRESHOLD};
use crate::graph::Graph;
use crate::linalg::dense::{inverse_spd, submatrix};

/// Dense covariance `Σ = Γ^{-1}` of a model on a fixed graph, computed once
/// and reused for every split and predictor.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    sigma: DMatrix<f64>,
    n: usize,
    p: usize,
}

impl CovarianceModel {
    /// Fails when `n(p+1)` exceeds the dense threshold.
    pub fn new(params: &GmrfParams, g: &Graph) -> Result<Self> {
        Self::with_max_dim(params, g, DEFAULT_DENSE_THRESHOLD)
    }

    pub fn with_max_dim(params: &GmrfParams, g: &Graph, max_dim: usize) -> Result<Self> {
        let dim = g.num_nodes() * params.num_attributes();
        if dim > max_dim {
            return Err(Error::InvalidArgument(format!(
                "dense covariance of dimension {dim} exceeds the limit {max_dim}"
            )));
        }
        let sigma = inverse_spd(&dense_precision(params, g))?;
        Ok(Self { sigma, n: g.num_nodes(), p: params.p() })
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    fn outcome_indices(&self, nodes: &[usize]) -> Vec<usize> {
        nodes.iter().map(|&u| self.p * self.n + u).collect()
    }

    /// Indices the predictor conditions on: labeled outcomes (LP), all
    /// features (LGC), or both (LGC/RP).
    fn observed(&self, split: &SplitSpec, algorithm: Algorithm) -> Result<Vec<usize>> {
        check_len("split size", self.n, split.num_nodes())?;
        let labels = self.outcome_indices(split.labeled().as_slice());
        let features = 0..self.p * self.n;
        Ok(match algorithm {
            Algorithm::Lp => labels,
            Algorithm::Lgc => features.collect(),
            Algorithm::LgcRp => features.chain(labels).collect(),
            other => {
                return Err(Error::InvalidArgument(format!(
                    "no analytic accuracy estimate for {other}; use LP, LGC or LGC/RP"
                )))
            }
        })
    }

    fn factor(&self, observed: &[usize]) -> Result<Option<Cholesky<f64, Dyn>>> {
        if observed.is_empty() {
            return Ok(None);
        }
        Cholesky::new(submatrix(&self.sigma, observed, observed))
            .map(Some)
            .ok_or_else(|| Error::Singular("covariance block of the observed variables".into()))
    }

    /// Expected test-set R² of the model's optimal predictor:
    /// `1 − tr Σ^(A) / (tr Σ^(0) − 1ᵀ Σ^(0) 1 / |U|)`, where `Σ^(0)` is the
    /// prior covariance of `y_U` and `Σ^(A)` its covariance after conditioning
    /// on what the predictor observes.
    pub fn estimate_r2(&self, split: &SplitSpec, algorithm: Algorithm) -> Result<f64> {
        let observed = self.observed(split, algorithm)?;
        let u = self.outcome_indices(split.unlabeled().as_slice());
        if u.len() < 2 {
            return Err(Error::InvalidArgument("need at least two unlabeled nodes".into()));
        }
        let sigma0 = submatrix(&self.sigma, &u, &u);
        let prior_trace = sigma0.trace();
        let explained = match self.factor(&observed)? {
            None => 0.0,
            Some(chol) => {
                let mut cross = submatrix(&self.sigma, &observed, &u);
                chol.l_dirty()
                    .solve_lower_triangular_mut(&mut cross);
                cross.norm_squared()
            }
        };
        Ok(r2_ratio(prior_trace - explained, prior_trace, sigma0.sum() / u.len() as f64))
    }

    /// Oracle prediction `E[y_U | observed]` for a concrete sample.
    pub fn oracle_prediction(&self, split: &SplitSpec, algorithm: Algorithm, sample: &AttributeMatrix) -> Result<Vec<f64>> {
        check_len("sample nodes", self.n, sample.num_nodes())?;
        check_len("sample attributes", self.p + 1, sample.num_attributes())?;
        let observed = self.observed(split, algorithm)?;
        let u = self.outcome_indices(split.unlabeled().as_slice());
        let Some(chol) = self.factor(&observed)? else {
            return Ok(vec![0.0; u.len()]);
        };
        let z = sample.vectorized();
        let zo = DVector::from_iterator(observed.len(), observed.iter().map(|&i| z[i]));
        Ok((submatrix(&self.sigma, &u, &observed) * chol.solve(&zo)).iter().copied().collect())
    }
}

fn r2_ratio(conditional_trace: f64, prior_trace: f64, mean_term: f64) -> f64 {
    1.0 - conditional_trace / (prior_trace - mean_term)
}

/// Convenience wrapper building the covariance for a single estimate.
pub fn estimate_r2(params: &GmrfParams, g: &Graph, split: &SplitSpec, algorithm: Algorithm) -> Result<f64> {
    CovarianceModel::new(params, g)?.estimate_r2(split, algorithm)
}
