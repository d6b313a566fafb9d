use std::path::Path;

use crate::error::{Error, Result};

/// A polynomial or rational graph filter, as a function of the normalized
/// Laplacian eigenvalue `λ ∈ [0, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FilterKind {
    /// `1 / (1 + ωλ)`.
    Lgc { omega: f64 },
    /// `(1 − d/(d+1) λ)^K`; exact for `d`-regular graphs only.
    Sgc { k: u32, degree: f64 },
}

impl FilterKind {
    pub fn label(&self) -> String {
        match self {
            FilterKind::Lgc { omega } => format!("LGC(omega={omega})"),
            FilterKind::Sgc { k, degree } => format!("SGC(K={k},d={degree})"),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            FilterKind::Lgc { omega } if !(omega.is_finite() && omega >= 0.0) => {
                Err(Error::InvalidArgument(format!("filter omega must be nonnegative, got {omega}")))
            }
            FilterKind::Sgc { degree, .. } if !(degree >= 1.0 && degree.is_finite()) => {
                Err(Error::InvalidArgument(format!("filter degree must be at least 1, got {degree}")))
            }
            _ => Ok(()),
        }
    }

    pub fn response_at(&self, lambda: f64) -> f64 {
        match *self {
            FilterKind::Lgc { omega } => 1.0 / (1.0 + omega * lambda),
            FilterKind::Sgc { k, degree } => (((degree + 1.0) - degree * lambda) / (degree + 1.0)).powi(k as i32),
        }
    }
}

/// Evaluates the filter at each eigenvalue.
pub fn filter_response(kind: FilterKind, lambdas: &[f64]) -> Result<Vec<f64>> {
    kind.validate()?;
    if let Some(bad) = lambdas.iter().find(|l| !(0.0..=2.0).contains(*l)) {
        return Err(Error::InvalidArgument(format!("eigenvalue {bad} outside [0, 2]")));
    }
    Ok(lambdas.iter().map(|&l| kind.response_at(l)).collect())
}

/// `count` evenly spaced points covering `[0, 2]`.
pub fn lambda_grid(count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..count).map(|i| 2.0 * i as f64 / (count - 1) as f64).collect(),
    }
}

/// Writes `lambda,response` rows.
pub fn write_response_csv(path: impl AsRef<Path>, lambdas: &[f64], responses: &[f64]) -> Result<()> {
    crate::error::check_len("filter responses", lambdas.len(), responses.len())?;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["lambda", "response"])?;
    for (l, r) in lambdas.iter().zip(responses) {
        w.write_record([l.to_string(), r.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
