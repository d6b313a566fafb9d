use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::Graph;

/// Full eigendecomposition `N = V diag(λ) Vᵀ` of the normalized Laplacian.
///
/// Dense, `O(n³)`; intended for exact likelihood and sampling at a few
/// thousand nodes and for frequency-response analysis. Eigenvalues are sorted
/// ascending.
#[derive(Debug, Clone)]
pub struct LaplacianSpectrum {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl LaplacianSpectrum {
    pub fn compute(g: &Graph) -> Self {
        let eig = SymmetricEigen::new(g.dense_normalized_laplacian());
        let n = g.num_nodes();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        // Roundoff can push the null eigenvalue slightly negative.
        let eigenvalues = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k].max(0.0)));
        let mut eigenvectors = DMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
        }
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors as columns, aligned with [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }
}
