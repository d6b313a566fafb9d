//! Gaussian Markov random field (GMRF) model for attributed graphs.
//!
//! Node attributes `A = [X y]` are modeled as a single multivariate Gaussian
//! whose precision is `Γ = H ⊗ I_n + diag(h) ⊗ N`, where `N` is the
//! normalized graph Laplacian. Conditioning this model on different sets of
//! observed attributes yields the classic graph learning algorithms:
//!
//! - conditioning on observed labels gives label propagation ([`algorithms::label_propagation`]),
//! - conditioning on features gives a linear graph convolution ([`algorithms::lgc_predict`]),
//! - conditioning on both gives LGC followed by residual propagation ([`algorithms::lgc_rp_predict`]).
//!
//! The crate also provides maximum-likelihood fitting of `(H, h)`
//! ([`gmrf::fit`]), analytic R² estimation ([`eval::CovarianceModel`]) and a
//! linearized belief propagation for categorical labels ([`linbp`]).
//!
//! With the default `parallel` feature, data-parallel loops (fit restarts,
//! stochastic probes, cross-validation grids, matvec rows) run on rayon.
//! Results do not depend on the thread count.

// `!(x > 0.0)` style checks reject NaN together with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod error;
pub mod eval;
pub mod gmrf;
pub mod graph;
pub mod linalg;
pub mod linbp;
pub mod parallel;
pub mod rng;

pub use error::{Error, Result};
pub use graph::{Graph, NodeIndexSet};
pub use gmrf::{AttributeMatrix, GmrfParams};
