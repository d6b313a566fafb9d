use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::small::{cholesky_in_place, inverse_from_factor, logdet_from_factor};
use super::{
    fill_block, AttributeMatrix, GmrfParams, PrecisionOperator, SufficientStats,
    DEFAULT_DENSE_THRESHOLD, DEFAULT_SPECTRAL_MAX_NODES,
};
use crate::error::{check_len, Error, Result};
use crate::graph::{Graph, LaplacianSpectrum};
use crate::linalg::dense::cholesky;
use crate::linalg::{conjugate_gradient, dot, rademacher, slq_logdet_estimate, CgConfig, SlqConfig, StochasticEstimate};
use crate::parallel;
use crate::rng::stream_rng;

/// Probe and solver settings of the stochastic likelihood path.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StochasticConfig {
    /// Probes and Lanczos depth for the log-determinant; the probe count and
    /// seed are reused for the Hutchinson trace terms of the gradient.
    pub slq: SlqConfig,
    /// Solver for `Γ x = z` inside the trace estimates.
    pub cg: CgConfig,
}

/// How log-determinants and trace terms are computed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum LikelihoodMethod {
    /// Dense if `n(p+1) ≤ 2000`, spectral if `n ≤ 4000`, stochastic otherwise.
    #[default]
    Auto,
    /// Cholesky of the full precision matrix (exact, `O((n(p+1))³)`).
    Dense,
    /// Eigendecomposition of `N` once, then `n` small blocks `H + λ_k diag(h)`
    /// per evaluation (exact).
    Spectral,
    /// Stochastic Lanczos quadrature and Hutchinson estimates with CG solves.
    Stochastic(StochasticConfig),
}

/// Gradient of the negative log-likelihood.
#[derive(Debug, Clone, PartialEq)]
pub struct NllGradient {
    /// `∂Ω/∂H_ij` treating every entry as independent (a symmetric matrix).
    pub coupling_entrywise: DMatrix<f64>,
    /// `∂Ω/∂h_i`.
    pub homophily: DVector<f64>,
}

impl NllGradient {
    /// Gradient for symmetric perturbations of `H`: off-diagonal entries
    /// accumulate `∂/∂H_ij + ∂/∂H_ji`.
    pub fn coupling(&self) -> DMatrix<f64> {
        let g = &self.coupling_entrywise;
        g + g.transpose() - DMatrix::from_diagonal(&g.diagonal())
    }
}

enum Backend {
    Dense { laplacian: DMatrix<f64> },
    Spectral(Arc<LaplacianSpectrum>),
    Stochastic(StochasticConfig),
}

/// Negative log-likelihood `Ω = vec(A)ᵀ Γ vec(A) − log det Γ` of fixed data,
/// as a function of the parameters.
///
/// The additive constant `n(p+1) log 2π` and the overall factor ½ are left
/// out on every path, so values from different methods are comparable; see
/// [`negative_log_density`] for the normalized quantity.
pub struct Likelihood<'g> {
    graph: &'g Graph,
    stats: SufficientStats,
    backend: Backend,
}

impl<'g> Likelihood<'g> {
    pub fn new(g: &'g Graph, a: &AttributeMatrix, method: LikelihoodMethod) -> Result<Self> {
        let stats = SufficientStats::new(g, a)?;
        let n = g.num_nodes();
        let dim = n * a.num_attributes();
        let backend = match method {
            LikelihoodMethod::Dense => Backend::Dense {
                laplacian: g.dense_normalized_laplacian(),
            },
            LikelihoodMethod::Auto if dim <= DEFAULT_DENSE_THRESHOLD => Backend::Dense {
                laplacian: g.dense_normalized_laplacian(),
            },
            LikelihoodMethod::Spectral => Backend::Spectral(Arc::new(LaplacianSpectrum::compute(g))),
            LikelihoodMethod::Auto if n <= DEFAULT_SPECTRAL_MAX_NODES => {
                Backend::Spectral(Arc::new(LaplacianSpectrum::compute(g)))
            }
            LikelihoodMethod::Auto => Backend::Stochastic(StochasticConfig::default()),
            LikelihoodMethod::Stochastic(cfg) => Backend::Stochastic(cfg),
        };
        Ok(Self { graph: g, stats, backend })
    }

    /// Spectral evaluator reusing an existing eigendecomposition of `N`.
    pub fn with_spectrum(g: &'g Graph, a: &AttributeMatrix, spectrum: Arc<LaplacianSpectrum>) -> Result<Self> {
        check_len("spectrum size", g.num_nodes(), spectrum.len())?;
        Ok(Self {
            graph: g,
            stats: SufficientStats::new(g, a)?,
            backend: Backend::Spectral(spectrum),
        })
    }

    pub fn stats(&self) -> &SufficientStats {
        &self.stats
    }

    pub fn graph(&self) -> &Graph {
        self.graph
    }

    /// The eigendecomposition in use, if this evaluator is spectral.
    pub fn spectrum(&self) -> Option<&Arc<LaplacianSpectrum>> {
        match &self.backend {
            Backend::Spectral(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_stochastic(&self) -> bool {
        matches!(self.backend, Backend::Stochastic(_))
    }

    fn check(&self, params: &GmrfParams) -> Result<()> {
        check_len("parameter attributes", self.stats.gram.nrows(), params.num_attributes())
    }

    /// `Ω` with its standard error (zero on exact paths).
    pub fn estimate(&self, params: &GmrfParams) -> Result<StochasticEstimate> {
        self.check(params)?;
        let quad = self.stats.quadratic_form(params);
        let logdet = match &self.backend {
            Backend::Dense { laplacian } => StochasticEstimate {
                value: self.dense_factor(params, laplacian)?.0,
                std_error: 0.0,
            },
            Backend::Spectral(spectrum) => StochasticEstimate {
                value: spectral_terms(params, spectrum, false)?.0,
                std_error: 0.0,
            },
            Backend::Stochastic(cfg) => slq_logdet_estimate(&PrecisionOperator::new(params, self.graph), &cfg.slq)?,
        };
        Ok(StochasticEstimate {
            value: quad - logdet.value,
            std_error: logdet.std_error,
        })
    }

    /// `Ω` (an estimate on the stochastic path).
    pub fn value(&self, params: &GmrfParams) -> Result<f64> {
        self.estimate(params).map(|e| e.value)
    }

    /// `Ω` and its gradient.
    pub fn value_and_gradient(&self, params: &GmrfParams) -> Result<(f64, NllGradient)> {
        self.check(params)?;
        let quad = self.stats.quadratic_form(params);
        let (logdet, traces, h_traces) = match &self.backend {
            Backend::Dense { laplacian } => self.dense_terms(params, laplacian)?,
            Backend::Spectral(spectrum) => {
                let (logdet, t) = spectral_terms(params, spectrum, true)?;
                let (traces, h_traces) = t.expect("traces requested");
                (logdet, traces, h_traces)
            }
            Backend::Stochastic(cfg) => {
                let logdet = slq_logdet_estimate(&PrecisionOperator::new(params, self.graph), &cfg.slq)?.value;
                let (traces, h_traces) = self.stochastic_traces(params, cfg)?;
                (logdet, traces, h_traces)
            }
        };
        let gradient = NllGradient {
            coupling_entrywise: &self.stats.gram - traces,
            homophily: &self.stats.smoothness - h_traces,
        };
        Ok((quad - logdet, gradient))
    }

    fn dense_factor(&self, params: &GmrfParams, laplacian: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>)> {
        let n = self.graph.num_nodes();
        let gamma = params.coupling().kronecker(&DMatrix::identity(n, n))
            + DMatrix::from_diagonal(params.homophily()).kronecker(laplacian);
        let chol = cholesky(gamma, "precision matrix")?;
        let logdet = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        Ok((logdet, chol.inverse()))
    }

    /// Log-determinant, `T_ij = tr(block_ij(Γ^{-1}))` and `tr(block_ii(Γ^{-1}) N)`.
    fn dense_terms(&self, params: &GmrfParams, laplacian: &DMatrix<f64>) -> Result<(f64, DMatrix<f64>, DVector<f64>)> {
        let n = self.graph.num_nodes();
        let m = params.num_attributes();
        let (logdet, sigma) = self.dense_factor(params, laplacian)?;
        let traces = DMatrix::from_fn(m, m, |i, j| (0..n).map(|u| sigma[(i * n + u, j * n + u)]).sum());
        let h_traces = DVector::from_fn(m, |i, _| {
            sigma
                .view((i * n, i * n), (n, n))
                .component_mul(laplacian)
                .sum()
        });
        Ok((logdet, traces, h_traces))
    }

    fn stochastic_traces(&self, params: &GmrfParams, cfg: &StochasticConfig) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let n = self.graph.num_nodes();
        let m = params.num_attributes();
        let op = PrecisionOperator::new(params, self.graph);
        let probes = cfg.slq.num_probes;
        // Trace probes use streams disjoint from the log-determinant probes.
        let per_probe: Vec<Result<(DMatrix<f64>, DVector<f64>)>> = parallel::map_indexed(probes, |k| {
            let z = rademacher(&mut stream_rng(cfg.slq.seed, (1u64 << 32) + k as u64), n * m);
            let x = conjugate_gradient(&op, &z, &cfg.cg)?;
            let t = DMatrix::from_fn(m, m, |i, j| dot(&x[i * n..(i + 1) * n], &z[j * n..(j + 1) * n]));
            let mut nz = vec![0.0; n];
            let h = DVector::from_fn(m, |i, _| {
                self.graph.normalized_laplacian_into(&z[i * n..(i + 1) * n], &mut nz);
                dot(&x[i * n..(i + 1) * n], &nz)
            });
            Ok((t, h))
        });
        let mut traces = DMatrix::zeros(m, m);
        let mut h_traces = DVector::zeros(m);
        for r in per_probe {
            let (t, h) = r?;
            traces += t;
            h_traces += h;
        }
        traces /= probes as f64;
        h_traces /= probes as f64;
        Ok(((&traces + traces.transpose()) * 0.5, h_traces))
    }
}

/// `Σ_k log det(H + λ_k D_h)` and optionally `Σ_k M_k^{-1}` and
/// `Σ_k λ_k diag(M_k^{-1})`.
#[allow(clippy::type_complexity)]
fn spectral_terms(
    params: &GmrfParams,
    spectrum: &LaplacianSpectrum,
    with_traces: bool,
) -> Result<(f64, Option<(DMatrix<f64>, DVector<f64>)>)> {
    let m = params.num_attributes();
    let mut block = vec![0.0; m * m];
    let mut inv = vec![0.0; m * m];
    let mut work = vec![0.0; m];
    let mut traces = vec![0.0; m * m];
    let mut h_traces = vec![0.0; m];
    let mut logdet = 0.0;
    for &lambda in spectrum.eigenvalues().iter() {
        fill_block(params, lambda, &mut block);
        if !cholesky_in_place(&mut block, m) {
            return Err(Error::NotPositiveDefinite(format!("precision block at eigenvalue {lambda}")));
        }
        logdet += logdet_from_factor(&block, m);
        if with_traces {
            inverse_from_factor(&block, m, &mut inv, &mut work);
            for (t, x) in traces.iter_mut().zip(&inv) {
                *t += x;
            }
            for i in 0..m {
                h_traces[i] += lambda * inv[i * m + i];
            }
        }
    }
    let traces = with_traces.then(|| (DMatrix::from_row_slice(m, m, &traces), DVector::from_vec(h_traces)));
    Ok((logdet, traces))
}

/// `Ω = vec(A)ᵀ Γ vec(A) − log det Γ` with the automatic method.
pub fn nll(params: &GmrfParams, g: &Graph, a: &AttributeMatrix) -> Result<f64> {
    Likelihood::new(g, a, LikelihoodMethod::Auto)?.value(params)
}

/// Gradient of [`nll`] with the automatic method.
pub fn nll_gradient(params: &GmrfParams, g: &Graph, a: &AttributeMatrix) -> Result<NllGradient> {
    Ok(Likelihood::new(g, a, LikelihoodMethod::Auto)?.value_and_gradient(params)?.1)
}

/// Exact `−log p(vec A) = ½ (Ω + n(p+1) log 2π)` (dense or spectral path).
pub fn negative_log_density(params: &GmrfParams, g: &Graph, a: &AttributeMatrix) -> Result<f64> {
    let n = g.num_nodes();
    let method = if n * a.num_attributes() <= DEFAULT_DENSE_THRESHOLD {
        LikelihoodMethod::Dense
    } else {
        LikelihoodMethod::Spectral
    };
    let omega = Likelihood::new(g, a, method)?.value(params)?;
    Ok(0.5 * (omega + (n * a.num_attributes()) as f64 * (2.0 * std::f64::consts::PI).ln()))
}
