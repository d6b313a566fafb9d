use std::path::Path;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Model parameters: the SPD attribute coupling `H` and the per-attribute
/// homophily strengths `h > 0`.
///
/// Attribute `p` (the last one) is the outcome; `0..p` are features.
#[derive(Debug, Clone, PartialEq)]
pub struct GmrfParams {
    coupling: DMatrix<f64>,
    homophily: DVector<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ParamsJson {
    #[serde(rename = "H")]
    coupling: Vec<f64>,
    h: Vec<f64>,
    p: usize,
}

impl GmrfParams {
    /// Validates and stores `(H, h)`.
    ///
    /// `H` must be square, symmetric to `1e-12` (relative to its largest
    /// entry) and positive definite; `h` must have one strictly positive entry
    /// per attribute. `H` is stored exactly symmetrized.
    pub fn new(coupling: DMatrix<f64>, homophily: DVector<f64>) -> Result<Self> {
        let m = coupling.nrows();
        if m == 0 || coupling.ncols() != m {
            return Err(Error::InvalidArgument(format!(
                "H must be a nonempty square matrix, got {}x{}",
                coupling.nrows(),
                coupling.ncols()
            )));
        }
        if homophily.len() != m {
            return Err(Error::DimensionMismatch {
                context: "homophily vector",
                expected: m,
                actual: homophily.len(),
            });
        }
        if coupling.iter().chain(homophily.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("parameters must be finite".into()));
        }
        let scale = coupling.amax().max(f64::MIN_POSITIVE);
        if (&coupling - coupling.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidArgument("H is not symmetric".into()));
        }
        let coupling = (&coupling + coupling.transpose()) * 0.5;
        let min_eig = SymmetricEigen::new(coupling.clone()).eigenvalues.min();
        if !(min_eig > 0.0) {
            return Err(Error::NotPositiveDefinite(format!(
                "H has smallest eigenvalue {min_eig:.3e}"
            )));
        }
        if let Some(bad) = homophily.iter().find(|&&x| !(x > 0.0)) {
            return Err(Error::InvalidArgument(format!("homophily entries must be positive, got {bad}")));
        }
        Ok(Self { coupling, homophily })
    }

    /// Scalar model (`p = 0`): `Γ = H·I + h·N`.
    pub fn scalar(coupling: f64, homophily: f64) -> Result<Self> {
        Self::new(DMatrix::from_element(1, 1, coupling), DVector::from_element(1, homophily))
    }

    /// `H`.
    pub fn coupling(&self) -> &DMatrix<f64> {
        &self.coupling
    }

    /// `h`.
    pub fn homophily(&self) -> &DVector<f64> {
        &self.homophily
    }

    /// `p + 1`.
    pub fn num_attributes(&self) -> usize {
        self.homophily.len()
    }

    /// Number of features `p`.
    pub fn p(&self) -> usize {
        self.num_attributes() - 1
    }

    /// Smoothing level implied for attribute `i`: `ω = h_i / H_ii`.
    pub fn omega(&self, i: usize) -> f64 {
        self.homophily[i] / self.coupling[(i, i)]
    }

    /// Regression coefficients of the outcome on the features implied by the
    /// model: `β = −H_{y,X} / H_{y,y}`.
    pub fn implied_beta(&self) -> Vec<f64> {
        let p = self.p();
        (0..p).map(|j| -self.coupling[(p, j)] / self.coupling[(p, p)]).collect()
    }

    pub fn to_json(&self) -> String {
        let m = self.num_attributes();
        let json = ParamsJson {
            coupling: (0..m).flat_map(|i| (0..m).map(move |j| (i, j))).map(|(i, j)| self.coupling[(i, j)]).collect(),
            h: self.homophily.iter().copied().collect(),
            p: self.p(),
        };
        serde_json::to_string_pretty(&json).expect("parameters serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let json: ParamsJson = serde_json::from_str(text)?;
        let m = json.p + 1;
        if json.coupling.len() != m * m {
            return Err(Error::DimensionMismatch {
                context: "H entries",
                expected: m * m,
                actual: json.coupling.len(),
            });
        }
        Self::new(
            DMatrix::from_row_slice(m, m, &json.coupling),
            DVector::from_vec(json.h),
        )
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
