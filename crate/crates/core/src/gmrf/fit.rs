use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::{AttributeMatrix, GmrfParams, Likelihood, LikelihoodMethod, NllGradient, DEFAULT_SPECTRAL_MAX_NODES};
use crate::error::{Error, Result};
use crate::graph::{Graph, LaplacianSpectrum};
use crate::parallel;
use crate::rng::stream_rng;

/// Update rule used by [`fit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Optimizer {
    /// Adam with decoupled weight decay (β₁ = 0.9, β₂ = 0.999, ε = 1e-8).
    #[default]
    AdamW,
    /// Plain gradient descent with Armijo backtracking and no weight decay;
    /// accepted iterates never increase the objective.
    GradientDescent,
}

/// Settings of the maximum-likelihood fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub restarts: usize,
    pub steps: usize,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub seed: u64,
    /// `Auto` picks the spectral path up to 4000 nodes and the stochastic
    /// path beyond; the dense path is only used when requested explicitly.
    pub method: LikelihoodMethod,
    pub optimizer: Optimizer,
    /// Restarts other than the first perturb the initial `log₁₀ h` uniformly
    /// within `± init_spread`.
    pub init_spread: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            steps: 3000,
            learning_rate: 1e-3,
            weight_decay: 2.5e-4,
            seed: 0,
            method: LikelihoodMethod::Auto,
            optimizer: Optimizer::AdamW,
            init_spread: 1.0,
        }
    }
}

impl FitConfig {
    fn validate(&self) -> Result<()> {
        if self.restarts == 0 || self.steps == 0 {
            return Err(Error::InvalidArgument("restarts and steps must be positive".into()));
        }
        if !(self.learning_rate > 0.0) || !(self.weight_decay >= 0.0) || !(self.init_spread >= 0.0) {
            return Err(Error::InvalidArgument(
                "learning rate must be positive; weight decay and init spread nonnegative".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of [`fit_with_report`].
#[derive(Debug, Clone)]
pub struct FitReport {
    pub params: GmrfParams,
    /// Objective of `params` (see [`Likelihood`]).
    pub nll: f64,
    pub best_restart: usize,
    /// Best objective reached by each restart (`NaN` if it diverged).
    pub restart_nlls: Vec<f64>,
    /// Objective at every iterate of the best restart.
    pub trace: Vec<f64>,
}

/// Maximum-likelihood estimate of `(H, h)`; see [`fit_with_report`].
pub fn fit(g: &Graph, a: &AttributeMatrix, cfg: &FitConfig) -> Result<GmrfParams> {
    fit_with_report(g, a, cfg).map(|r| r.params)
}

/// Maximum-likelihood fit with random restarts.
///
/// Parameters are optimized in unconstrained form
/// `H = (R M)(R M)ᵀ`, `h = exp(η)`, where `M` is lower triangular with a
/// log-parameterized diagonal and `R` is the Cholesky factor of a fixed
/// data-derived reference `H₀`. `R` only rescales the coordinates: every SPD
/// `H` is reachable. The reference comes from per-frequency moment matching
/// when an eigendecomposition of `N` is available (in the eigenbasis, the
/// attribute precision at eigenvalue `λ` is `H + λ diag(h)`), and from the
/// graph-free estimate `n (AᵀA)^{-1}` otherwise. Restart 0 starts at the
/// reference; the others perturb it randomly.
///
/// Restarts run in parallel with seeds derived from `cfg.seed`; the winner
/// has the lowest objective, ties going to the lower restart index.
pub fn fit_with_report(g: &Graph, a: &AttributeMatrix, cfg: &FitConfig) -> Result<FitReport> {
    cfg.validate()?;
    let method = match cfg.method {
        LikelihoodMethod::Auto if g.num_nodes() <= DEFAULT_SPECTRAL_MAX_NODES => LikelihoodMethod::Spectral,
        LikelihoodMethod::Auto => LikelihoodMethod::Stochastic(Default::default()),
        m => m,
    };
    let lik = Likelihood::new(g, a, method)?;
    let reference = match lik.spectrum() {
        Some(spectrum) => spectral_reference(spectrum, a),
        None => graph_free_reference(&lik),
    };
    let chart = Chart::new(&reference)?;

    let runs: Vec<Result<Run>> = parallel::map_indexed(cfg.restarts, |r| {
        let theta = chart.initial_point(r, cfg);
        match cfg.optimizer {
            Optimizer::AdamW => adamw(&lik, &chart, theta, cfg),
            Optimizer::GradientDescent => gradient_descent(&lik, &chart, theta, cfg),
        }
    });

    let mut best: Option<(usize, Run)> = None;
    let mut restart_nlls = Vec::with_capacity(cfg.restarts);
    let mut failures = Vec::new();
    for (r, run) in runs.into_iter().enumerate() {
        match run {
            Ok(run) => {
                restart_nlls.push(run.best_value);
                if best.as_ref().is_none_or(|(_, b)| run.best_value < b.best_value) {
                    best = Some((r, run));
                }
            }
            Err(e) => {
                restart_nlls.push(f64::NAN);
                failures.push(format!("restart {r}: {e}"));
            }
        }
    }
    for f in &failures {
        log::warn!("fit {f}");
    }
    let (best_restart, run) = best.ok_or_else(|| Error::FitDiverged(failures.join("; ")))?;
    Ok(FitReport {
        params: run.best_params,
        nll: run.best_value,
        best_restart,
        restart_nlls,
        trace: run.trace,
    })
}

/// Per-frequency moment estimate of `(H, h)`.
///
/// Projects the attributes onto the eigenvectors of `N`, groups consecutive
/// eigenvalues into bins, inverts each bin's empirical covariance and fits
/// `P(λ) ≈ H + λ diag(h)`: diagonal entries by weighted least squares in `λ`,
/// off-diagonal entries by their weighted mean.
fn spectral_reference(spectrum: &LaplacianSpectrum, a: &AttributeMatrix) -> (DMatrix<f64>, DVector<f64>) {
    let n = spectrum.len();
    let m = a.num_attributes();
    let coeffs = spectrum.eigenvectors().transpose() * a.values();
    let per_bin = (4 * (m + 2)).max(n / 20);
    let bins = (n / per_bin).max(1);

    let mut lambdas = Vec::with_capacity(bins);
    let mut precisions = Vec::with_capacity(bins);
    for b in 0..bins {
        let lo = b * n / bins;
        let hi = (b + 1) * n / bins;
        let count = hi - lo;
        let block = coeffs.rows(lo, count);
        let cov = block.transpose() * block / count as f64 + DMatrix::identity(m, m) * 1e-12;
        let Some(chol) = cov.cholesky() else { continue };
        // Unbiased inverse-Wishart correction.
        let shrink = ((count as f64 - m as f64 - 1.0) / count as f64).max(0.1);
        precisions.push(chol.inverse() * shrink);
        lambdas.push(spectrum.eigenvalues().rows(lo, count).mean());
    }
    if precisions.len() < 2 {
        return graph_free_from_gram(&(a.values().transpose() * a.values()), n);
    }

    let mut coupling = DMatrix::zeros(m, m);
    let mut homophily = DVector::zeros(m);
    for i in 0..m {
        // Sampling noise of a precision entry scales with its size.
        let weights: Vec<f64> = precisions.iter().map(|p| 1.0 / p[(i, i)].powi(2)).collect();
        let (intercept, slope) = weighted_line(&lambdas, &precisions.iter().map(|p| p[(i, i)]).collect::<Vec<_>>(), &weights);
        let floor = precisions.iter().map(|p| p[(i, i)]).fold(f64::INFINITY, f64::min);
        coupling[(i, i)] = if intercept > 0.0 { intercept } else { 0.1 * floor };
        homophily[i] = if slope > 0.0 { slope } else { 0.01 * coupling[(i, i)] };
        for j in 0..i {
            let w: Vec<f64> = precisions.iter().map(|p| 1.0 / (p[(i, i)] * p[(j, j)])).collect();
            let total: f64 = w.iter().sum();
            let mean = precisions.iter().zip(&w).map(|(p, w)| w * p[(i, j)]).sum::<f64>() / total;
            coupling[(i, j)] = mean;
            coupling[(j, i)] = mean;
        }
    }
    (make_spd(coupling), homophily)
}

fn weighted_line(x: &[f64], y: &[f64], w: &[f64]) -> (f64, f64) {
    let sw: f64 = w.iter().sum();
    let mx = x.iter().zip(w).map(|(x, w)| w * x).sum::<f64>() / sw;
    let my = y.iter().zip(w).map(|(y, w)| w * y).sum::<f64>() / sw;
    let sxx: f64 = x.iter().zip(w).map(|(x, w)| w * (x - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).zip(w).map(|((x, y), w)| w * (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (my - slope * mx, slope)
}

/// Raises eigenvalues to at least `1e-3` of the largest one.
fn make_spd(m: DMatrix<f64>) -> DMatrix<f64> {
    let eig = m.symmetric_eigen();
    let top = eig.eigenvalues.amax().max(f64::MIN_POSITIVE);
    let clipped = eig.eigenvalues.map(|l| l.max(1e-3 * top));
    let v = &eig.eigenvectors;
    let out = v * DMatrix::from_diagonal(&clipped) * v.transpose();
    (&out + out.transpose()) * 0.5
}

fn graph_free_from_gram(gram: &DMatrix<f64>, n: usize) -> (DMatrix<f64>, DVector<f64>) {
    let m = gram.nrows();
    let ridge = 1e-9 * gram.trace().max(f64::MIN_POSITIVE) / m as f64;
    let cov = gram / n.max(1) as f64 + DMatrix::identity(m, m) * ridge;
    let coupling = make_spd(cov.cholesky().expect("ridged Gram matrix is SPD").inverse());
    let homophily = coupling.diagonal();
    (coupling, homophily)
}

fn graph_free_reference(lik: &Likelihood<'_>) -> (DMatrix<f64>, DVector<f64>) {
    graph_free_from_gram(&lik.stats().gram, lik.stats().num_nodes)
}

/// Coordinates `θ = [M (row-major lower triangle, log diagonal), η]`.
struct Chart {
    m: usize,
    root: DMatrix<f64>,
    log_h0: DVector<f64>,
}

impl Chart {
    fn new((coupling, homophily): &(DMatrix<f64>, DVector<f64>)) -> Result<Self> {
        let root = coupling
            .clone()
            .cholesky()
            .ok_or_else(|| Error::NotPositiveDefinite("reference coupling".into()))?
            .l();
        Ok(Self {
            m: coupling.nrows(),
            root,
            log_h0: homophily.map(f64::ln),
        })
    }

    fn len(&self) -> usize {
        self.m * (self.m + 1) / 2 + self.m
    }

    fn initial_point(&self, restart: usize, cfg: &FitConfig) -> Vec<f64> {
        let mut theta = vec![0.0; self.len()];
        let tri = self.m * (self.m + 1) / 2;
        theta[tri..].copy_from_slice(self.log_h0.as_slice());
        if restart == 0 {
            return theta;
        }
        let mut rng = stream_rng(cfg.seed, restart as u64);
        let mut k = 0;
        for i in 0..self.m {
            for j in 0..=i {
                theta[k] = if i == j { rng.random_range(-0.5..0.5) } else { rng.random_range(-0.3..0.3) };
                k += 1;
            }
        }
        for t in &mut theta[tri..] {
            *t += std::f64::consts::LN_10 * cfg.init_spread * rng.random_range(-1.0..1.0);
        }
        theta
    }

    fn factor(&self, theta: &[f64]) -> DMatrix<f64> {
        let mut mm = DMatrix::zeros(self.m, self.m);
        let mut k = 0;
        for i in 0..self.m {
            for j in 0..=i {
                mm[(i, j)] = if i == j { theta[k].exp() } else { theta[k] };
                k += 1;
            }
        }
        mm
    }

    fn params(&self, theta: &[f64]) -> Result<GmrfParams> {
        let l = &self.root * self.factor(theta);
        let tri = self.m * (self.m + 1) / 2;
        GmrfParams::new(&l * l.transpose(), DVector::from_iterator(self.m, theta[tri..].iter().map(|t| t.exp())))
    }

    /// Chain rule from `(∂Ω/∂H, ∂Ω/∂h)` to `∂Ω/∂θ`.
    fn pullback(&self, theta: &[f64], params: &GmrfParams, grad: &NllGradient) -> Vec<f64> {
        let mm = self.factor(theta);
        let rotated = self.root.transpose() * &grad.coupling_entrywise * &self.root;
        let d_m = (rotated * &mm) * 2.0;
        let mut out = Vec::with_capacity(self.len());
        for i in 0..self.m {
            for j in 0..=i {
                out.push(if i == j { d_m[(i, j)] * mm[(i, i)] } else { d_m[(i, j)] });
            }
        }
        out.extend(grad.homophily.iter().zip(params.homophily().iter()).map(|(g, h)| g * h));
        out
    }
}

struct Run {
    best_value: f64,
    best_params: GmrfParams,
    trace: Vec<f64>,
}

struct Evaluated {
    value: f64,
    params: GmrfParams,
    gradient: Vec<f64>,
}

fn evaluate(lik: &Likelihood<'_>, chart: &Chart, theta: &[f64]) -> Result<Evaluated> {
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(Error::FitDiverged("non-finite parameters".into()));
    }
    let params = chart.params(theta)?;
    let (value, grad) = lik.value_and_gradient(&params)?;
    if !value.is_finite() {
        return Err(Error::FitDiverged(format!("objective became {value}")));
    }
    let gradient = chart.pullback(theta, &params, &grad);
    Ok(Evaluated { value, params, gradient })
}

fn adamw(lik: &Likelihood<'_>, chart: &Chart, mut theta: Vec<f64>, cfg: &FitConfig) -> Result<Run> {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;
    let k = theta.len();
    let mut first = vec![0.0; k];
    let mut second = vec![0.0; k];
    let mut trace = Vec::with_capacity(cfg.steps + 1);
    let mut best: Option<(f64, GmrfParams)> = None;

    for step in 0..=cfg.steps {
        let e = evaluate(lik, chart, &theta)?;
        trace.push(e.value);
        if best.as_ref().is_none_or(|(v, _)| e.value < *v) {
            best = Some((e.value, e.params));
        }
        if step == cfg.steps {
            break;
        }
        let t = (step + 1) as i32;
        let c1 = 1.0 - BETA1.powi(t);
        let c2 = 1.0 - BETA2.powi(t);
        for i in 0..k {
            let g = e.gradient[i];
            first[i] = BETA1 * first[i] + (1.0 - BETA1) * g;
            second[i] = BETA2 * second[i] + (1.0 - BETA2) * g * g;
            let update = (first[i] / c1) / ((second[i] / c2).sqrt() + EPS);
            theta[i] -= cfg.learning_rate * (update + cfg.weight_decay * theta[i]);
        }
    }
    let (best_value, best_params) = best.expect("at least one evaluation");
    Ok(Run { best_value, best_params, trace })
}

fn gradient_descent(lik: &Likelihood<'_>, chart: &Chart, mut theta: Vec<f64>, cfg: &FitConfig) -> Result<Run> {
    let mut current = evaluate(lik, chart, &theta)?;
    let mut trace = vec![current.value];
    let mut step_size = cfg.learning_rate;
    'outer: for _ in 0..cfg.steps {
        let g2: f64 = current.gradient.iter().map(|g| g * g).sum();
        if g2 == 0.0 {
            break;
        }
        for _ in 0..60 {
            let trial: Vec<f64> = theta.iter().zip(&current.gradient).map(|(t, g)| t - step_size * g).collect();
            match evaluate(lik, chart, &trial) {
                Ok(e) if e.value <= current.value - 1e-4 * step_size * g2 => {
                    theta = trial;
                    current = e;
                    trace.push(current.value);
                    step_size *= 2.0;
                    continue 'outer;
                }
                _ => step_size *= 0.5,
            }
        }
        break;
    }
    Ok(Run {
        best_value: current.value,
        best_params: current.params,
        trace,
    })
}
