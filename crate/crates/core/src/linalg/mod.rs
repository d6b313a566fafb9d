//! Numerical kernels: conjugate gradient, Lanczos quadrature, stochastic
//! trace estimation, and dense reference formulas.

mod cg;
pub mod dense;
mod lanczos;
mod operator;

pub use cg::{conjugate_gradient, conjugate_gradient_from, conjugate_gradient_run, CgConfig, CgSolution};
pub use dense::{conditional_gaussian_covariance_form, dense_conditional_gaussian};
pub use lanczos::{check_symmetric, hutchinson_trace, lanczos, rademacher, slq_logdet, slq_logdet_estimate, SlqConfig, StochasticEstimate};
pub use operator::{FnOperator, LinearOperator};

/// `Σ a_i b_i`.
#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Euclidean norm.
#[inline]
pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y ← y + a x`.
#[inline]
pub fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}
