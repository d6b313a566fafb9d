use nalgebra::{DMatrix, DVector};

use super::{AttributeMatrix, GmrfParams};
use crate::error::{check_len, Result};
use crate::graph::Graph;
use crate::linalg::{axpy, LinearOperator};

/// Matrix-free `Γ = H ⊗ I_n + diag(h) ⊗ N` on attribute-major vectors.
pub struct PrecisionOperator<'a> {
    params: &'a GmrfParams,
    graph: &'a Graph,
}

impl<'a> PrecisionOperator<'a> {
    pub fn new(params: &'a GmrfParams, graph: &'a Graph) -> Self {
        Self { params, graph }
    }
}

impl LinearOperator for PrecisionOperator<'_> {
    fn dim(&self) -> usize {
        self.graph.num_nodes() * self.params.num_attributes()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let n = self.graph.num_nodes();
        let m = self.params.num_attributes();
        let h_mat = self.params.coupling();
        let h_vec = self.params.homophily();
        for i in 0..m {
            let out_i = &mut out[i * n..(i + 1) * n];
            self.graph.normalized_laplacian_into(&v[i * n..(i + 1) * n], out_i);
            for x in out_i.iter_mut() {
                *x *= h_vec[i];
            }
            for j in 0..m {
                axpy(h_mat[(i, j)], &v[j * n..(j + 1) * n], out_i);
            }
        }
    }
}

/// `Γ v` without materializing `Γ`.
pub fn precision_apply(params: &GmrfParams, g: &Graph, v: &[f64]) -> Result<Vec<f64>> {
    let op = PrecisionOperator::new(params, g);
    check_len("precision operator", op.dim(), v.len())?;
    Ok(op.apply(v))
}

/// Dense `Γ` (for small problems and tests).
pub fn dense_precision(params: &GmrfParams, g: &Graph) -> DMatrix<f64> {
    let n = g.num_nodes();
    let lap = g.dense_normalized_laplacian();
    params.coupling().kronecker(&DMatrix::identity(n, n))
        + DMatrix::from_diagonal(params.homophily()).kronecker(&lap)
}

/// Data summaries that determine the quadratic part of the likelihood:
/// the Gram matrix `G = AᵀA` and the smoothness terms `s_i = A_iᵀ N A_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    pub gram: DMatrix<f64>,
    pub smoothness: DVector<f64>,
    pub num_nodes: usize,
}

impl SufficientStats {
    pub fn new(g: &Graph, a: &AttributeMatrix) -> Result<Self> {
        check_len("attribute rows", g.num_nodes(), a.num_nodes())?;
        let values = a.values();
        let gram = values.transpose() * values;
        let smoothness = DVector::from_iterator(
            a.num_attributes(),
            (0..a.num_attributes()).map(|i| {
                let col = a.column(i);
                g.laplacian_quadratic_form(&col).expect("length checked")
            }),
        );
        Ok(Self {
            gram,
            smoothness,
            num_nodes: g.num_nodes(),
        })
    }

    /// `vec(A)ᵀ Γ vec(A) = tr(H G) + Σ_i h_i s_i`.
    pub fn quadratic_form(&self, params: &GmrfParams) -> f64 {
        params.coupling().component_mul(&self.gram).sum() + params.homophily().dot(&self.smoothness)
    }
}

/// `φ = ½ Σ_u a_uᵀ H a_u + ½ Σ_i h_i A_iᵀ N A_i`.
pub fn log_potential(params: &GmrfParams, g: &Graph, a: &AttributeMatrix) -> Result<f64> {
    check_len("attribute columns", params.num_attributes(), a.num_attributes())?;
    let stats = SufficientStats::new(g, a)?;
    Ok(0.5 * stats.quadratic_form(params))
}
