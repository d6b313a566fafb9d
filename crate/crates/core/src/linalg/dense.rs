//! Dense reference computations, used as exact small-scale paths and as test
//! oracles for the matrix-free algorithms.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{check_len, Error, Result};
use crate::graph::NodeIndexSet;

/// Rows `rows` and columns `cols` of `m`.
pub fn submatrix(m: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Cholesky factorization, reporting failure as [`Error::NotPositiveDefinite`].
pub fn cholesky(m: DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m).ok_or_else(|| Error::NotPositiveDefinite(what.to_string()))
}

/// `log det M` of an SPD matrix via Cholesky.
pub fn logdet_spd(m: &DMatrix<f64>) -> Result<f64> {
    let chol = cholesky(m.clone(), "log-determinant")?;
    Ok(2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Inverse of an SPD matrix via Cholesky.
pub fn inverse_spd(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    Ok(cholesky(m.clone(), "inverse")?.inverse())
}

fn validate(dim: usize, mean: &[f64], observed: &NodeIndexSet, observed_vals: &[f64]) -> Result<()> {
    check_len("conditional gaussian mean", dim, mean.len())?;
    check_len("conditional gaussian observed set", dim, observed.universe())?;
    check_len("conditional gaussian observed values", observed.len(), observed_vals.len())
}

/// Conditional distribution of `z_P` given `z_Q`, in precision form.
///
/// `Q` is `observed` and `P` its complement. Returns the conditional mean
/// `z̄_P − Γ_PP^{-1} Γ_PQ (z_Q − z̄_Q)` and covariance `Γ_PP^{-1}`, both
/// indexed by the (sorted) entries of `P`.
pub fn dense_conditional_gaussian(
    mean: &[f64],
    precision: &DMatrix<f64>,
    observed: &NodeIndexSet,
    observed_vals: &[f64],
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let dim = precision.nrows();
    validate(dim, mean, observed, observed_vals)?;
    let q = observed.as_slice();
    let p_set = observed.complement();
    let p = p_set.as_slice();
    if p.is_empty() {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }

    let chol = Cholesky::new(submatrix(precision, p, p))
        .ok_or_else(|| Error::Singular("precision block of the unobserved variables".into()))?;
    let shift = DVector::from_iterator(q.len(), q.iter().zip(observed_vals).map(|(&i, &z)| z - mean[i]));
    let rhs = submatrix(precision, p, q) * shift;
    let correction = chol.solve(&rhs);
    let cond_mean = p.iter().zip(correction.iter()).map(|(&i, c)| mean[i] - c).collect();
    Ok((cond_mean, chol.inverse()))
}

/// The same conditional distribution computed from the covariance:
/// `z̄_P + Σ_PQ Σ_QQ^{-1} (z_Q − z̄_Q)` and `Σ_PP − Σ_PQ Σ_QQ^{-1} Σ_QP`.
pub fn conditional_gaussian_covariance_form(
    mean: &[f64],
    covariance: &DMatrix<f64>,
    observed: &NodeIndexSet,
    observed_vals: &[f64],
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let dim = covariance.nrows();
    validate(dim, mean, observed, observed_vals)?;
    let q = observed.as_slice();
    let p_set = observed.complement();
    let p = p_set.as_slice();
    let sigma_pp = submatrix(covariance, p, p);
    if q.is_empty() {
        return Ok((p.iter().map(|&i| mean[i]).collect(), sigma_pp));
    }
    let chol = Cholesky::new(submatrix(covariance, q, q))
        .ok_or_else(|| Error::Singular("covariance block of the observed variables".into()))?;
    let sigma_pq = submatrix(covariance, p, q);
    let shift = DVector::from_iterator(q.len(), q.iter().zip(observed_vals).map(|(&i, &z)| z - mean[i]));
    let gain = &sigma_pq * chol.solve(&shift);
    let cond_mean = p.iter().zip(gain.iter()).map(|(&i, g)| mean[i] + g).collect();
    let cond_cov = sigma_pp - &sigma_pq * chol.solve(&sigma_pq.transpose());
    Ok((cond_mean, cond_cov))
}
