use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::small::{cholesky_in_place, solve_upper_transpose};
use super::{dense_precision, AttributeMatrix, GmrfParams, DEFAULT_DENSE_THRESHOLD};
use crate::error::{check_len, Error, Result};
use crate::graph::{Graph, LaplacianSpectrum, NodeIndexSet};
use crate::linalg::dense::{cholesky, dense_conditional_gaussian};
use crate::rng::{rng_from_seed, Rng as SeededRng};

/// How to draw exact samples from `N(0, Γ^{-1})`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SamplingMethod {
    /// Dense when `n(p+1)` is at most the dense threshold, spectral otherwise.
    #[default]
    Auto,
    /// Cholesky of the full `n(p+1) × n(p+1)` precision.
    Dense,
    /// Per-eigenvalue draws in the eigenbasis of `N` (cost dominated by one
    /// `n × n` eigendecomposition).
    Spectral,
}

fn normals(rng: &mut SeededRng, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.sample(StandardNormal)).collect()
}

/// One draw of `vec(A) ~ N(0, Γ^{-1})`. Columns are not re-centered.
pub fn sample(params: &GmrfParams, g: &Graph, seed: u64) -> Result<AttributeMatrix> {
    sample_with(params, g, SamplingMethod::Auto, seed)
}

pub fn sample_with(params: &GmrfParams, g: &Graph, method: SamplingMethod, seed: u64) -> Result<AttributeMatrix> {
    let dim = g.num_nodes() * params.num_attributes();
    match method {
        SamplingMethod::Dense => sample_dense(params, g, seed),
        SamplingMethod::Spectral => sample_spectral(params, &LaplacianSpectrum::compute(g), seed),
        SamplingMethod::Auto if dim <= DEFAULT_DENSE_THRESHOLD => sample_dense(params, g, seed),
        SamplingMethod::Auto => sample_spectral(params, &LaplacianSpectrum::compute(g), seed),
    }
}

fn sample_dense(params: &GmrfParams, g: &Graph, seed: u64) -> Result<AttributeMatrix> {
    let n = g.num_nodes();
    let m = params.num_attributes();
    let chol = cholesky(dense_precision(params, g), "precision matrix")?;
    let z = DVector::from_vec(normals(&mut rng_from_seed(seed), n * m));
    // Γ = L Lᵀ, so x = L^{-T} z has covariance Γ^{-1}.
    let x = chol
        .l_dirty()
        .tr_solve_lower_triangular(&z)
        .ok_or_else(|| Error::Singular("precision Cholesky factor".into()))?;
    AttributeMatrix::from_vectorized(n, m, x.as_slice())
}

/// Exact draw using a precomputed spectrum `N = V Λ Vᵀ`.
///
/// In the eigenbasis the precision is block diagonal with blocks
/// `H + λ_k diag(h)`, so the coefficient rows are independent.
pub fn sample_spectral(params: &GmrfParams, spectrum: &LaplacianSpectrum, seed: u64) -> Result<AttributeMatrix> {
    let n = spectrum.len();
    let m = params.num_attributes();
    let mut rng = rng_from_seed(seed);
    let mut coeffs = DMatrix::<f64>::zeros(n, m);
    let mut block = vec![0.0; m * m];
    for (k, &lambda) in spectrum.eigenvalues().iter().enumerate() {
        fill_block(params, lambda, &mut block);
        if !cholesky_in_place(&mut block, m) {
            return Err(Error::NotPositiveDefinite(format!("precision block at eigenvalue {lambda}")));
        }
        let mut z = normals(&mut rng, m);
        solve_upper_transpose(&block, m, &mut z);
        for i in 0..m {
            coeffs[(k, i)] = z[i];
        }
    }
    Ok(AttributeMatrix::new(spectrum.eigenvectors() * coeffs))
}

/// Row-major `H + λ diag(h)`.
pub(crate) fn fill_block(params: &GmrfParams, lambda: f64, block: &mut [f64]) {
    let m = params.num_attributes();
    let h_mat = params.coupling();
    for i in 0..m {
        for j in 0..m {
            block[i * m + j] = h_mat[(i, j)];
        }
        block[i * m + i] += lambda * params.homophily()[i];
    }
}

/// Draws the attribute columns not listed in `observed_cols` from their exact
/// conditional distribution given the listed columns of `observed`.
///
/// Dense computation; intended for desk-scale graphs.
pub fn sample_conditional(
    params: &GmrfParams,
    g: &Graph,
    observed_cols: &[usize],
    observed: &AttributeMatrix,
    seed: u64,
) -> Result<AttributeMatrix> {
    let n = g.num_nodes();
    let m = params.num_attributes();
    check_len("observed attribute rows", n, observed.num_nodes())?;
    check_len("observed attribute columns", m, observed.num_attributes())?;
    if let Some(&bad) = observed_cols.iter().find(|&&c| c >= m) {
        return Err(Error::InvalidArgument(format!("attribute column {bad} out of range")));
    }

    let mut cols = observed_cols.to_vec();
    cols.sort_unstable();
    cols.dedup();
    let q_idx: Vec<usize> = cols.iter().flat_map(|&i| (0..n).map(move |u| i * n + u)).collect();
    let q = NodeIndexSet::new(q_idx, n * m)?;
    let vals = q.gather(observed.vectorized());
    let p = q.complement();
    if p.is_empty() {
        return Ok(observed.clone());
    }

    let (cond_mean, cond_cov) = dense_conditional_gaussian(&vec![0.0; n * m], &dense_precision(params, g), &q, &vals)?;
    let chol = cholesky(cond_cov, "conditional covariance")?;
    let z = DVector::from_vec(normals(&mut rng_from_seed(seed), p.len()));
    let draw = DVector::from_vec(cond_mean) + chol.l_dirty().lower_triangle() * z;

    let mut out = observed.vectorized().to_vec();
    p.scatter(draw.as_slice(), &mut out);
    AttributeMatrix::with_names(DMatrix::from_column_slice(n, m, &out), observed.names().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmrf::synthetic_params;
    use crate::graph::watts_strogatz;

    #[test]
    fn edgeless_variance() {
        let params = GmrfParams::scalar(4.0, 1.0).unwrap();
        let g = Graph::edgeless(1500);
        for method in [SamplingMethod::Dense, SamplingMethod::Spectral] {
            let a = sample_with(&params, &g, method, 3).unwrap();
            let y = a.outcome();
            let var = y.iter().map(|x| x * x).sum::<f64>() / y.len() as f64;
            // N = I on isolated nodes: variance 1 / (H + h).
            assert!((var - 0.2).abs() < 0.2 * 0.1, "{var}");
        }
    }

    fn empirical_covariance(params: &GmrfParams, g: &Graph, method: SamplingMethod, draws: u64) -> DMatrix<f64> {
        let dim = g.num_nodes() * params.num_attributes();
        let mut acc = DMatrix::zeros(dim, dim);
        for s in 0..draws {
            let v = DVector::from_column_slice(sample_with(params, g, method, s).unwrap().vectorized());
            acc += &v * v.transpose();
        }
        acc / draws as f64
    }

    #[test]
    fn empirical_precision_matches() {
        let g = watts_strogatz(4, 2, 0.0, 0).unwrap();
        let params = synthetic_params(1, 2.0, 1).unwrap();
        let gamma = dense_precision(&params, &g);
        let exact_cov = gamma.clone().try_inverse().unwrap();
        for method in [SamplingMethod::Dense, SamplingMethod::Spectral] {
            let cov = empirical_covariance(&params, &g, method, 50_000);
            let rel = (&cov - &exact_cov).amax() / exact_cov.amax();
            assert!(rel < 0.05, "{method:?}: {rel}");
            let precision = cov.try_inverse().unwrap();
            let rel = (&precision - &gamma).amax() / gamma.amax();
            assert!(rel < 0.1, "{method:?}: {rel}");
        }
    }

    #[test]
    fn correlation_grows_with_homophily() {
        let g = Graph::from_edges(2, vec![(0, 1, 1.0)]).unwrap();
        let mut last = 0.0;
        for omega in [0.5, 2.0, 8.0] {
            let params = GmrfParams::scalar(1.0, omega).unwrap();
            let cov = dense_precision(&params, &g).try_inverse().unwrap();
            let corr = cov[(0, 1)] / (cov[(0, 0)] * cov[(1, 1)]).sqrt();
            let emp = empirical_covariance(&params, &g, SamplingMethod::Dense, 20_000);
            let emp_corr = emp[(0, 1)] / (emp[(0, 0)] * emp[(1, 1)]).sqrt();
            assert!(corr > last && (emp_corr - corr).abs() < 0.05);
            last = corr;
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let g = watts_strogatz(30, 4, 0.1, 0).unwrap();
        let params = synthetic_params(2, 5.0, 1).unwrap();
        for method in [SamplingMethod::Dense, SamplingMethod::Spectral] {
            assert_eq!(sample_with(&params, &g, method, 8).unwrap(), sample_with(&params, &g, method, 8).unwrap());
        }
    }

    #[test]
    fn conditional_sampling() {
        let g = watts_strogatz(3, 2, 0.0, 0).unwrap();
        let params = synthetic_params(1, 3.0, 2).unwrap();
        let full = sample(&params, &g, 5).unwrap();
        assert_eq!(sample_conditional(&params, &g, &[0, 1], &full, 1).unwrap(), full);

        // Conditional mean of the outcome block from the hand Schur complement.
        let gamma = dense_precision(&params, &g);
        let gpp = gamma.view((3, 3), (3, 3)).into_owned();
        let gpq = gamma.view((3, 0), (3, 3)).into_owned();
        let x = DVector::from_vec(full.column(0));
        let mean = -gpp.clone().try_inverse().unwrap() * gpq * x;
        let draws = 20_000;
        let mut acc = DVector::zeros(3);
        for s in 0..draws {
            let a = sample_conditional(&params, &g, &[0], &full, s).unwrap();
            assert_eq!(a.column(0), full.column(0));
            acc += DVector::from_vec(a.column(1));
        }
        acc /= draws as f64;
        let sd = gpp.try_inverse().unwrap().diagonal().map(f64::sqrt);
        for i in 0..3 {
            assert!((acc[i] - mean[i]).abs() < 5.0 * sd[i] / (draws as f64).sqrt());
        }
    }
}
