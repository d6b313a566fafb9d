//! Metrics, splits, cross-validation, analytic accuracy estimates and
//! spectral filter responses.

mod cv;
mod filter;
mod marginal_lp;
mod metrics;
mod r2_estimate;
mod split;

pub use cv::{cross_validate, fold_assignment, log_grid, CvPlan, CvResult, GridScore, Metric};
pub use filter::{filter_response, lambda_grid, write_response_csv, FilterKind};
pub use marginal_lp::marginalized_lp_oracle;
pub use metrics::{f1_score, pearson, r_squared, spearman};
pub use r2_estimate::{estimate_r2, CovarianceModel};
pub use split::{inductive_union, random_split, SplitKind, SplitSpec};
