//! The generative model `vec(A) ~ N(0, Γ^{-1})` with
//! `Γ = H ⊗ I_n + diag(h) ⊗ N`.
//!
//! Vectors over all attributes of all nodes are attribute-major: the entry of
//! node `u`, attribute `i` sits at `i·n + u`, which is exactly the
//! column-major storage of the `n × (p+1)` attribute matrix.

mod attributes;
mod fit;
mod likelihood;
mod params;
mod precision;
mod sampling;
mod small;
mod synthetic;

pub use attributes::AttributeMatrix;
pub use fit::{fit, fit_with_report, FitConfig, FitReport, Optimizer};
pub use likelihood::{
    negative_log_density, nll, nll_gradient, Likelihood, LikelihoodMethod, NllGradient, StochasticConfig,
};
pub use params::GmrfParams;
pub use precision::{dense_precision, log_potential, precision_apply, PrecisionOperator, SufficientStats};
pub use sampling::{sample, sample_conditional, sample_spectral, sample_with, SamplingMethod};
pub use synthetic::synthetic_params;

pub(crate) use sampling::fill_block;

/// Largest `n(p+1)` handled by dense factorizations when a method is `Auto`.
pub const DEFAULT_DENSE_THRESHOLD: usize = 2000;

/// Largest node count for which `Auto` uses the eigendecomposition of `N`.
pub const DEFAULT_SPECTRAL_MAX_NODES: usize = 4000;
