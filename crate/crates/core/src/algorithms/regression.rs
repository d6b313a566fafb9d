use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};

/// Linear coefficients `β`; attributes are centered so there is no intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionCoefficients {
    pub beta: Vec<f64>,
}

impl RegressionCoefficients {
    pub fn predict_row(&self, row: impl IntoIterator<Item = f64>) -> f64 {
        row.into_iter().zip(&self.beta).map(|(x, b)| x * b).sum()
    }

    /// `X β` for every row of `x`.
    pub fn predict(&self, x: &DMatrix<f64>) -> Result<Vec<f64>> {
        check_len("regression features", self.beta.len(), x.ncols())?;
        Ok((x * DVector::from_column_slice(&self.beta)).iter().copied().collect())
    }
}

/// Least squares `argmin ‖Fβ − t‖`, minimum-norm when `F` is rank deficient.
/// Singular values below `1e-10 · σ_max` are treated as zero.
pub fn ols(features: &DMatrix<f64>, targets: &[f64]) -> Result<RegressionCoefficients> {
    check_len("regression targets", features.nrows(), targets.len())?;
    if features.nrows() == 0 {
        return Err(Error::InvalidArgument("regression needs at least one row".into()));
    }
    if features.ncols() == 0 {
        return Ok(RegressionCoefficients { beta: Vec::new() });
    }
    if features.iter().chain(targets).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("regression inputs must be finite".into()));
    }
    let svd = features.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let beta = if sigma_max == 0.0 {
        DVector::zeros(features.ncols())
    } else {
        svd.solve(&DVector::from_column_slice(targets), 1e-10 * sigma_max)
            .map_err(|e| Error::InvalidArgument(e.to_string()))?
    };
    Ok(RegressionCoefficients { beta: beta.iter().copied().collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_design_returns_targets() {
        let b = ols(&DMatrix::identity(3, 3), &[1.0, -2.0, 0.5]).unwrap();
        for (x, y) in b.beta.iter().zip([1.0, -2.0, 0.5]) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn duplicated_column_splits_weight() {
        let f = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, -1.0, -1.0]);
        let t = [2.0, 4.0, -2.0];
        let b = ols(&f, &t).unwrap();
        let pinv = f.clone().pseudo_inverse(1e-12).unwrap() * DVector::from_column_slice(&t);
        assert!((b.beta[0] - 1.0).abs() < 1e-12 && (b.beta[1] - 1.0).abs() < 1e-12);
        assert!((b.beta[0] - pinv[0]).abs() < 1e-12);
    }

    #[test]
    fn exact_linear_data_has_zero_residual() {
        let f = DMatrix::from_fn(20, 3, |i, j| ((i * 7 + j * 3) % 11) as f64 - 5.0 + 0.1 * (i * j) as f64);
        let beta = [0.5, -1.5, 2.0];
        let t: Vec<f64> = (0..20).map(|i| (0..3).map(|j| f[(i, j)] * beta[j]).sum()).collect();
        let b = ols(&f, &t).unwrap();
        let fitted = b.predict(&f).unwrap();
        assert!(fitted.iter().zip(&t).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(ols(&DMatrix::zeros(3, 2), &[1.0, 2.0, 3.0]).unwrap().beta, vec![0.0, 0.0]);
        assert!(ols(&DMatrix::zeros(0, 2), &[]).is_err());
        assert!(ols(&DMatrix::zeros(2, 2), &[1.0]).is_err());
        // Underdetermined: one row, min-norm solution.
        let b = ols(&DMatrix::from_row_slice(1, 2, &[3.0, 4.0]), &[25.0]).unwrap();
        assert!((b.beta[0] - 3.0).abs() < 1e-12 && (b.beta[1] - 4.0).abs() < 1e-12);
    }
}
