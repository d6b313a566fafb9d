use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use super::GmrfParams;
use crate::error::Result;
use crate::rng::rng_from_seed;

/// Random parameters following the synthetic benchmark recipe.
///
/// Draws `p + 1` standard normal vectors `z_i ∈ R^{p+1}`, forms their Gram
/// matrix `F_ij = z_iᵀ z_j`, sets `H = (F + 0.01 I)^{-1}` and
/// `h_i = h0 · 10^{b_i}` with `b_i ~ U[−0.5, 0.5)`.
pub fn synthetic_params(p: usize, h0: f64, seed: u64) -> Result<GmrfParams> {
    let m = p + 1;
    let mut rng = rng_from_seed(seed);
    let z = DMatrix::from_fn(m, m, |_, _| rng.sample::<f64, _>(StandardNormal));
    let f = &z * z.transpose() + DMatrix::identity(m, m) * 0.01;
    let coupling = f
        .cholesky()
        .expect("Gram matrix plus ridge is positive definite")
        .inverse();
    let homophily = DVector::from_fn(m, |_, _| h0 * 10f64.powf(rng.random_range(-0.5..0.5)));
    GmrfParams::new((&coupling + coupling.transpose()) * 0.5, homophily)
}
