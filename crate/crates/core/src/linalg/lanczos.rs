use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng as _;

use super::{axpy, dot, norm, LinearOperator};
use crate::error::{Error, Result};
use crate::parallel;
use crate::rng::{rng_from_seed, stream_rng, Rng};

/// Probe budget for stochastic estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlqConfig {
    pub num_probes: usize,
    pub lanczos_steps: usize,
    pub seed: u64,
}

impl Default for SlqConfig {
    fn default() -> Self {
        Self {
            num_probes: 32,
            lanczos_steps: 40,
            seed: 0,
        }
    }
}

impl SlqConfig {
    fn validate(&self) -> Result<()> {
        if self.num_probes == 0 || self.lanczos_steps == 0 {
            return Err(Error::InvalidArgument(
                "probe count and Lanczos steps must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Monte-Carlo estimate with its standard error over probes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StochasticEstimate {
    pub value: f64,
    pub std_error: f64,
}

impl StochasticEstimate {
    pub(crate) fn from_samples(samples: &[f64]) -> Self {
        let k = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / k;
        let std_error = if samples.len() > 1 {
            let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (k - 1.0);
            (var / k).sqrt()
        } else {
            f64::INFINITY
        };
        Self { value: mean, std_error }
    }
}

/// Rademacher vector (entries ±1 with equal probability).
pub fn rademacher(rng: &mut Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| if rng.random_bool(0.5) { 1.0 } else { -1.0 }).collect()
}

/// Lanczos tridiagonalization started at `start` (normalized internally),
/// without reorthogonalization.
///
/// Returns the diagonal `α` and off-diagonal `β` of the tridiagonal matrix.
/// Stops early when an off-diagonal coefficient falls below `1e-12` times the
/// largest diagonal magnitude seen, i.e. the Krylov space became invariant.
pub fn lanczos(op: &impl LinearOperator, start: &[f64], steps: usize) -> (Vec<f64>, Vec<f64>) {
    let m = op.dim();
    let start_norm = norm(start);
    let mut q: Vec<f64> = start.iter().map(|x| x / start_norm).collect();
    let mut q_prev = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mut alphas = Vec::with_capacity(steps);
    let mut betas = Vec::with_capacity(steps);
    let mut beta_prev = 0.0;
    let mut scale = 0.0f64;

    for j in 0..steps.min(m) {
        op.apply_into(&q, &mut w);
        let alpha = dot(&q, &w);
        alphas.push(alpha);
        scale = scale.max(alpha.abs());
        axpy(-alpha, &q, &mut w);
        axpy(-beta_prev, &q_prev, &mut w);
        let beta = norm(&w);
        if j + 1 == steps.min(m) || beta <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        betas.push(beta);
        std::mem::swap(&mut q_prev, &mut q);
        for (qi, wi) in q.iter_mut().zip(&w) {
            *qi = wi / beta;
        }
        beta_prev = beta;
    }
    (alphas, betas)
}

/// Gauss quadrature `e₁ᵀ f(T) e₁` for the tridiagonal `T = tridiag(β, α, β)`.
fn quadrature(alphas: &[f64], betas: &[f64], f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let k = alphas.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let mut total = 0.0;
    for j in 0..k {
        let tau = eig.eigenvectors[(0, j)];
        total += tau * tau * f(eig.eigenvalues[j])?;
    }
    Ok(total)
}

/// Stochastic Lanczos quadrature estimate of `log det M` with its standard
/// error across probes.
pub fn slq_logdet_estimate(op: &impl LinearOperator, cfg: &SlqConfig) -> Result<StochasticEstimate> {
    cfg.validate()?;
    let m = op.dim();
    if m == 0 {
        return Ok(StochasticEstimate { value: 0.0, std_error: 0.0 });
    }
    let per_probe: Vec<Result<f64>> = parallel::map_indexed(cfg.num_probes, |k| {
        let z = rademacher(&mut stream_rng(cfg.seed, k as u64), m);
        let (alphas, betas) = lanczos(op, &z, cfg.lanczos_steps);
        let q = quadrature(&alphas, &betas, |theta| {
            if theta > 0.0 {
                Ok(theta.ln())
            } else {
                Err(Error::NotPositiveDefinite(format!("Ritz value {theta:.3e} in log-determinant")))
            }
        })?;
        Ok(m as f64 * q)
    });
    let samples = per_probe.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(StochasticEstimate::from_samples(&samples))
}

/// Stochastic Lanczos quadrature estimate of `log det M` (Rademacher probes).
pub fn slq_logdet(op: &impl LinearOperator, cfg: &SlqConfig) -> Result<f64> {
    slq_logdet_estimate(op, cfg).map(|e| e.value)
}

/// Hutchinson estimate `(1/k) Σ zᵀ M z` of `tr M` (Rademacher probes).
///
/// Debug builds first check that `M` is symmetric.
pub fn hutchinson_trace(op: &impl LinearOperator, cfg: &SlqConfig) -> Result<StochasticEstimate> {
    cfg.validate()?;
    if cfg!(debug_assertions) {
        check_symmetric(op, cfg.seed)?;
    }
    let m = op.dim();
    let samples = parallel::map_indexed(cfg.num_probes, |k| {
        let z = rademacher(&mut stream_rng(cfg.seed, k as u64), m);
        dot(&z, &op.apply(&z))
    });
    Ok(StochasticEstimate::from_samples(&samples))
}

/// Randomized test of `⟨u, Mv⟩ = ⟨Mu, v⟩` to a relative tolerance of `1e-9`.
pub fn check_symmetric(op: &impl LinearOperator, seed: u64) -> Result<()> {
    let m = op.dim();
    let mut rng = rng_from_seed(seed ^ 0x5EED_5EED);
    let u: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let v: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mu = op.apply(&u);
    let mv = op.apply(&v);
    let lhs = dot(&u, &mv);
    let rhs = dot(&mu, &v);
    let scale = norm(&u) * norm(&mv) + norm(&mu) * norm(&v);
    if (lhs - rhs).abs() <= 1e-9 * scale.max(f64::MIN_POSITIVE) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "operator is not symmetric: <u,Mv> = {lhs:.6e} but <Mu,v> = {rhs:.6e}"
        )))
    }
}
