//! Predictors obtained by conditioning the model on different observations,
//! plus the plain baselines they are compared against.
//!
//! | predictor | observes | closed form on `U` |
//! |---|---|---|
//! | LR | features | `X_U β` |
//! | LP | labels `y_L` | `−(I+ωN)_UU^{-1} (I+ωN)_UL y_L` |
//! | LGC | features | `[(I+ωN)^{-1} X β]_U` |
//! | LGC/RP | features and labels | LGC plus LP of the labeled residuals |
//! | SGC | features | `[S̃^K X β]_U` |

mod classify;
mod lp;
mod predictor;
mod regression;
mod smoothing;

pub use classify::{classify_by_threshold, tune_threshold};
pub use lp::{
    label_propagation, label_propagation_multiclass, label_propagation_unconstrained, residual_propagation,
    Propagation,
};
pub use predictor::{
    lgc_predict, lgc_rp_predict, linear_regression_predict, predict, sgc_predict, Algorithm, FeatureCache,
    Hyperparameters, Prediction,
};
pub use regression::{ols, RegressionCoefficients};
pub use smoothing::{neumann_smoothing, sgc_features, smooth_features, Smoothed};
pub(crate) use smoothing::iterate;

use crate::error::{Error, Result};

/// Smoothing level `ω ≥ 0`, equivalently `α = ω / (1 + ω) ∈ [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothingParam {
    omega: f64,
}

impl SmoothingParam {
    pub fn from_omega(omega: f64) -> Result<Self> {
        if omega.is_finite() && omega >= 0.0 {
            Ok(Self { omega })
        } else {
            Err(Error::InvalidArgument(format!("omega must be finite and nonnegative, got {omega}")))
        }
    }

    pub fn from_alpha(alpha: f64) -> Result<Self> {
        if (0.0..1.0).contains(&alpha) {
            Ok(Self { omega: alpha / (1.0 - alpha) })
        } else {
            Err(Error::InvalidArgument(format!("alpha must lie in [0, 1), got {alpha}")))
        }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn alpha(&self) -> f64 {
        self.omega / (1.0 + self.omega)
    }
}

/// Executor for the propagation fixed points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Jacobi-style fixed-point iteration, the propagation as written.
    #[default]
    FixedPoint,
    /// Conjugate gradient on the equivalent SPD system.
    ConjugateGradient,
}

/// Iteration budget for propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagationBudget {
    pub max_iterations: usize,
    /// Fixed point: stop when `‖x_{t+1} − x_t‖ ≤ tol · ‖x_{t+1}‖`.
    /// Conjugate gradient: stop when the relative residual is below `tol`.
    pub rel_change_tolerance: f64,
    pub solver: Solver,
}

impl Default for PropagationBudget {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            rel_change_tolerance: 1e-9,
            solver: Solver::FixedPoint,
        }
    }
}

impl PropagationBudget {
    pub fn with_solver(self, solver: Solver) -> Self {
        Self { solver, ..self }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 || !(self.rel_change_tolerance > 0.0) {
            return Err(Error::InvalidArgument(
                "propagation budget needs positive iterations and tolerance".into(),
            ));
        }
        Ok(())
    }
}
