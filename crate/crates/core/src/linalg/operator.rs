use nalgebra::{DMatrix, DVectorView, DVectorViewMut};

/// Symmetric linear map `v ↦ M v` on `R^dim`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// Writes `M v` into `out`. Both slices have length [`Self::dim`].
    fn apply_into(&self, v: &[f64], out: &mut [f64]);

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.apply_into(v, &mut out);
        out
    }
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        debug_assert_eq!(self.nrows(), self.ncols());
        self.nrows()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        let x = DVectorView::from_slice(v, v.len());
        let mut y = DVectorViewMut::from_slice(out, v.len());
        y.gemv(1.0, self, &x, 0.0);
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        (**self).apply_into(v, out)
    }
}

/// Operator defined by a closure.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F> LinearOperator for FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_into(&self, v: &[f64], out: &mut [f64]) {
        (self.f)(v, out)
    }
}
