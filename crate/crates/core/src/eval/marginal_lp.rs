use nalgebra::{Cholesky, DVector};

use super::split::SplitSpec;
use crate::error::{check_len, Error, Result};
use crate::gmrf::{dense_precision, GmrfParams, DEFAULT_DENSE_THRESHOLD};
use crate::graph::Graph;
use crate::linalg::dense::submatrix;

/// Label propagation with the features integrated out, computed densely.
///
/// With `P` the outcome variables and `Q` the features, the marginal
/// precision of `y` is the Schur complement `Γ̄ = Γ_PP − Γ_PQ Γ_QQ^{-1} Γ_QP`
/// (dense in general), and the prediction is `−Γ̄_UU^{-1} Γ̄_UL y_L`.
pub fn marginalized_lp_oracle(params: &GmrfParams, g: &Graph, split: &SplitSpec) -> Result<Vec<f64>> {
    split.check_graph(g)?;
    let n = g.num_nodes();
    let p = params.p();
    if n * (p + 1) > DEFAULT_DENSE_THRESHOLD {
        return Err(Error::InvalidArgument(format!(
            "dense marginalization of dimension {} exceeds the limit {DEFAULT_DENSE_THRESHOLD}",
            n * (p + 1)
        )));
    }
    check_len("labeled outcomes", split.labeled().len(), split.y_labeled().len())?;
    let gamma = dense_precision(params, g);
    let outcome: Vec<usize> = (p * n..(p + 1) * n).collect();
    let features: Vec<usize> = (0..p * n).collect();
    let mut marginal = submatrix(&gamma, &outcome, &outcome);
    if !features.is_empty() {
        let qq = Cholesky::new(submatrix(&gamma, &features, &features))
            .ok_or_else(|| Error::Singular("feature block of the precision".into()))?;
        let qp = submatrix(&gamma, &features, &outcome);
        marginal -= qp.transpose() * qq.solve(&qp);
    }
    let (l, u) = (split.labeled().as_slice(), split.unlabeled().as_slice());
    let uu = Cholesky::new(submatrix(&marginal, u, u))
        .ok_or_else(|| Error::Singular("unlabeled block of the marginal precision".into()))?;
    let rhs = submatrix(&marginal, u, l) * DVector::from_column_slice(split.y_labeled());
    Ok(uu.solve(&rhs).iter().map(|v| -v).collect())
}
