use super::{axpy, dot, norm, LinearOperator};
use crate::error::{check_len, Error, Result};

/// Stopping rule for [`conjugate_gradient`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgConfig {
    /// Stop once `‖b − Mx‖ ≤ rel_tolerance · ‖b‖`.
    pub rel_tolerance: f64,
    /// Iteration cap; `None` means `10 · dim`.
    pub max_iterations: Option<usize>,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self {
            rel_tolerance: 1e-10,
            max_iterations: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual `‖b − Mx‖ / ‖b‖` (recurrence estimate).
    pub relative_residual: f64,
    pub converged: bool,
}

/// Solves `M x = b` for symmetric positive definite `M`, starting from zero.
pub fn conjugate_gradient(op: &impl LinearOperator, b: &[f64], cfg: &CgConfig) -> Result<Vec<f64>> {
    conjugate_gradient_from(op, b, None, cfg).map(|s| s.x)
}

/// Conjugate gradient with an optional starting guess; fails with
/// [`Error::CgNotConverged`] when the iteration cap is reached.
pub fn conjugate_gradient_from(
    op: &impl LinearOperator,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &CgConfig,
) -> Result<CgSolution> {
    let sol = conjugate_gradient_run(op, b, x0, cfg)?;
    if sol.converged {
        Ok(sol)
    } else {
        Err(Error::CgNotConverged {
            iterations: sol.iterations,
            residual: sol.relative_residual,
        })
    }
}

/// Like [`conjugate_gradient_from`] but returns the last iterate, flagged,
/// when the iteration cap is reached.
pub fn conjugate_gradient_run(
    op: &impl LinearOperator,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &CgConfig,
) -> Result<CgSolution> {
    let m = op.dim();
    check_len("conjugate gradient right-hand side", m, b.len())?;
    if !(cfg.rel_tolerance > 0.0) {
        return Err(Error::InvalidArgument("CG tolerance must be positive".into()));
    }
    let max_iter = cfg.max_iterations.unwrap_or(10 * m.max(1));

    let b_norm = norm(b);
    if b_norm == 0.0 {
        return Ok(CgSolution {
            x: vec![0.0; m],
            iterations: 0,
            relative_residual: 0.0,
            converged: true,
        });
    }

    let mut x = match x0 {
        Some(x0) => {
            check_len("conjugate gradient initial guess", m, x0.len())?;
            x0.to_vec()
        }
        None => vec![0.0; m],
    };
    let mut r = b.to_vec();
    let mut q = vec![0.0; m];
    if x0.is_some() {
        op.apply_into(&x, &mut q);
        axpy(-1.0, &q, &mut r);
    }
    let target = cfg.rel_tolerance * b_norm;
    let mut rr = dot(&r, &r);
    let mut p = r.clone();

    for it in 0..=max_iter {
        if rr.sqrt() <= target {
            return Ok(CgSolution {
                x,
                iterations: it,
                relative_residual: rr.sqrt() / b_norm,
                converged: true,
            });
        }
        if it == max_iter {
            break;
        }
        op.apply_into(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::NotPositiveDefinite(format!(
                "CG found a direction of non-positive curvature ({pq:.3e})"
            )));
        }
        let step = rr / pq;
        axpy(step, &p, &mut x);
        axpy(-step, &q, &mut r);
        let rr_next = dot(&r, &r);
        let beta = rr_next / rr;
        rr = rr_next;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    Ok(CgSolution {
        x,
        iterations: max_iter,
        relative_residual: rr.sqrt() / b_norm,
        converged: false,
    })
}
