use nalgebra::DMatrix;

use super::{PropagationBudget, SmoothingParam, Solver};
use crate::error::{check_len, Result};
use crate::graph::Graph;
use crate::linalg::{conjugate_gradient_run, norm, CgConfig, FnOperator, LinearOperator};
use crate::parallel;

/// Result of a column-wise propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct Smoothed {
    pub values: DMatrix<f64>,
    /// Largest iteration count over columns.
    pub iterations: usize,
    /// False if any column hit the iteration budget (a warning is logged).
    pub converged: bool,
}

pub(crate) struct FixedPoint {
    pub values: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub change: f64,
}

/// Iterates `x ← step(x)` from `start` until the relative change falls below
/// the budget tolerance.
pub(crate) fn iterate(
    start: Vec<f64>,
    budget: &PropagationBudget,
    mut step: impl FnMut(&[f64], &mut [f64]),
) -> FixedPoint {
    let mut cur = start;
    let mut next = vec![0.0; cur.len()];
    let mut change = f64::INFINITY;
    for it in 1..=budget.max_iterations {
        step(&cur, &mut next);
        let diff = cur.iter().zip(&next).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let size = norm(&next);
        change = if size > 0.0 { diff / size } else if diff == 0.0 { 0.0 } else { f64::INFINITY };
        std::mem::swap(&mut cur, &mut next);
        if change <= budget.rel_change_tolerance {
            return FixedPoint { values: cur, iterations: it, converged: true, change };
        }
    }
    FixedPoint {
        values: cur,
        iterations: budget.max_iterations,
        converged: false,
        change,
    }
}

pub(crate) fn cg_config(budget: &PropagationBudget) -> CgConfig {
    CgConfig {
        rel_tolerance: budget.rel_change_tolerance,
        max_iterations: Some(budget.max_iterations),
    }
}

/// CG solve; budget exhaustion returns the last iterate flagged as not
/// converged.
pub(crate) fn cg_solve(op: &impl LinearOperator, b: &[f64], budget: &PropagationBudget) -> Result<FixedPoint> {
    let sol = conjugate_gradient_run(op, b, None, &cg_config(budget))?;
    Ok(FixedPoint {
        values: sol.x,
        iterations: sol.iterations,
        converged: sol.converged,
        change: sol.relative_residual,
    })
}

pub(crate) fn smooth_column(g: &Graph, x0: &[f64], s: SmoothingParam, budget: &PropagationBudget) -> Result<FixedPoint> {
    let alpha = s.alpha();
    if alpha == 0.0 {
        return Ok(FixedPoint { values: x0.to_vec(), iterations: 0, converged: true, change: 0.0 });
    }
    match budget.solver {
        Solver::FixedPoint => Ok(iterate(x0.to_vec(), budget, |cur, next| {
            g.normalized_adjacency_into(cur, next);
            for (o, x) in next.iter_mut().zip(x0) {
                *o = (1.0 - alpha) * x + alpha * *o;
            }
        })),
        Solver::ConjugateGradient => {
            let omega = s.omega();
            let op = FnOperator::new(g.num_nodes(), |v: &[f64], out: &mut [f64]| {
                g.normalized_adjacency_into(v, out);
                for (o, x) in out.iter_mut().zip(v) {
                    *o = (1.0 + omega) * x - omega * *o;
                }
            });
            cg_solve(&op, x0, budget)
        }
    }
}

pub(crate) fn collect_columns(n: usize, columns: Vec<FixedPoint>, what: &str) -> Smoothed {
    let p = columns.len();
    let mut values = DMatrix::zeros(n, p);
    let mut iterations = 0;
    let mut converged = true;
    for (j, col) in columns.into_iter().enumerate() {
        values.set_column(j, &nalgebra::DVector::from_vec(col.values));
        iterations = iterations.max(col.iterations);
        if !col.converged {
            converged = false;
            log::warn!("{what}: column {j} stopped at relative change {:.3e} after {} iterations", col.change, col.iterations);
        }
    }
    Smoothed { values, iterations, converged }
}

/// Feature smoothing `X̄ = (I + ωN)^{-1} X`, column by column.
///
/// With [`Solver::FixedPoint`] each column iterates
/// `x ← (1−α) x⁽⁰⁾ + α S x` from `x⁽⁰⁾`; with [`Solver::ConjugateGradient`]
/// it solves `(I + ωN) x̄ = x⁽⁰⁾`.
pub fn smooth_features(g: &Graph, x: &DMatrix<f64>, s: SmoothingParam, budget: &PropagationBudget) -> Result<Smoothed> {
    budget.validate()?;
    check_len("feature rows", g.num_nodes(), x.nrows())?;
    let columns: Vec<Result<FixedPoint>> = parallel::map_indexed(x.ncols(), |j| {
        let col: Vec<f64> = x.column(j).iter().copied().collect();
        smooth_column(g, &col, s, budget)
    });
    let columns = columns.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(collect_columns(g.num_nodes(), columns, "feature smoothing"))
}

/// Truncated Neumann series `(1−α) Σ_{j=0}^{depth} (αS)^j X`.
pub fn neumann_smoothing(g: &Graph, x: &DMatrix<f64>, s: SmoothingParam, depth: usize) -> Result<DMatrix<f64>> {
    check_len("feature rows", g.num_nodes(), x.nrows())?;
    let alpha = s.alpha();
    let n = g.num_nodes();
    let mut out = DMatrix::zeros(n, x.ncols());
    for j in 0..x.ncols() {
        let mut term: Vec<f64> = x.column(j).iter().copied().collect();
        let mut acc = term.clone();
        let mut next = vec![0.0; n];
        for _ in 0..depth {
            g.normalized_adjacency_into(&term, &mut next);
            for (t, v) in term.iter_mut().zip(&next) {
                *t = alpha * v;
            }
            for (a, t) in acc.iter_mut().zip(&term) {
                *a += t;
            }
        }
        for (u, a) in acc.iter().enumerate() {
            out[(u, j)] = (1.0 - alpha) * a;
        }
    }
    Ok(out)
}

/// `S̃^K X`.
pub fn sgc_features(g: &Graph, x: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    check_len("feature rows", g.num_nodes(), x.nrows())?;
    let n = g.num_nodes();
    let columns = parallel::map_indexed(x.ncols(), |j| {
        let mut cur: Vec<f64> = x.column(j).iter().copied().collect();
        let mut next = vec![0.0; n];
        for _ in 0..k {
            g.selfloop_adjacency_into(&cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        cur
    });
    let mut out = DMatrix::zeros(n, x.ncols());
    for (j, col) in columns.into_iter().enumerate() {
        out.set_column(j, &nalgebra::DVector::from_vec(col));
    }
    Ok(out)
}
