//! Linearized belief propagation for categorical labels under a homophily
//! coupling `Φ = (1 − ε/c) J_c + ε I_c`.
//!
//! Beliefs are stored as residuals `p̂_u = p_u − 1/c`, one row per node. The
//! update `p̂_u ← φ̂_u + (ε/c) Σ_v W_uv p̂_v` uses the unnormalized adjacency;
//! its fixed point is `(I − (ε/c) W ⊗ I_c)^{-1} φ̂`.

use nalgebra::DMatrix;

use crate::algorithms::{PropagationBudget, Solver};
use crate::error::{check_len, Error, Result};
use crate::graph::{Graph, NodeIndexSet};
use crate::linalg::{conjugate_gradient_run, CgConfig, FnOperator};
use crate::parallel;

const SPECTRAL_RADIUS_ITERATIONS: usize = 500;

/// Class count, coupling strength and iteration budget.
#[derive(Debug, Clone, PartialEq)]
pub struct LinBpConfig {
    num_classes: usize,
    epsilon: f64,
    spectral_radius: f64,
    budget: PropagationBudget,
}

impl LinBpConfig {
    /// Requires `ε < c / ρ̂(W)`, with `ρ̂` a power-iteration estimate of the
    /// adjacency spectral radius of `g`, so the update is a contraction on
    /// `g` and on every induced subgraph of it.
    pub fn new(g: &Graph, num_classes: usize, epsilon: f64, budget: PropagationBudget) -> Result<Self> {
        if num_classes < 2 {
            return Err(Error::InvalidArgument(format!("need at least 2 classes, got {num_classes}")));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
        }
        budget.validate()?;
        let rho = g.adjacency_spectral_radius(SPECTRAL_RADIUS_ITERATIONS);
        if epsilon * rho >= num_classes as f64 {
            return Err(Error::InvalidArgument(format!(
                "epsilon {epsilon} must be below c / rho(W) = {}",
                num_classes as f64 / rho
            )));
        }
        Ok(Self { num_classes, epsilon, spectral_radius: rho, budget })
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `ε / c`, the propagation weight.
    pub fn rate(&self) -> f64 {
        self.epsilon / self.num_classes as f64
    }

    /// The estimate `ρ̂(W)` checked at construction.
    pub fn spectral_radius(&self) -> f64 {
        self.spectral_radius
    }

    pub fn budget(&self) -> &PropagationBudget {
        &self.budget
    }
}

/// Residual beliefs or priors: an `n × c` matrix whose rows sum to zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualBeliefs {
    values: DMatrix<f64>,
}

impl ResidualBeliefs {
    pub fn new(values: DMatrix<f64>) -> Result<Self> {
        for (u, row) in values.row_iter().enumerate() {
            let scale: f64 = row.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
            if row.sum().abs() > 1e-9 * scale || row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument(format!("residual row {u} does not sum to zero")));
            }
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize, c: usize) -> Self {
        Self { values: DMatrix::zeros(n, c) }
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn num_nodes(&self) -> usize {
        self.values.nrows()
    }

    pub fn num_classes(&self) -> usize {
        self.values.ncols()
    }

    /// Probabilities `p̂_u + 1/c`.
    pub fn probabilities(&self) -> DMatrix<f64> {
        let base = 1.0 / self.num_classes() as f64;
        self.values.map(|v| v + base)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinBpRun {
    pub beliefs: ResidualBeliefs,
    pub iterations: usize,
    pub converged: bool,
}

/// Linearized priors that the labeled neighbors induce on each unlabeled
/// node: `φ̂_u(k) = (ε/c)(d_u^{L,k} − d_u^L / c)`, with (weighted) counts of
/// labeled neighbors. Rows follow the ascending order of the unlabeled nodes.
pub fn residual_priors_from_labels(
    g: &Graph,
    labeled: &NodeIndexSet,
    labels: &[usize],
    cfg: &LinBpConfig,
) -> Result<ResidualBeliefs> {
    check_len("node set", g.num_nodes(), labeled.universe())?;
    check_len("class labels", labeled.len(), labels.len())?;
    let c = cfg.num_classes();
    if let Some(&bad) = labels.iter().find(|&&k| k >= c) {
        return Err(Error::InvalidArgument(format!("class {bad} out of range for {c} classes")));
    }
    let mut class_of = vec![None; g.num_nodes()];
    for (&u, &k) in labeled.iter().zip(labels) {
        class_of[u] = Some(k);
    }
    let unlabeled = labeled.complement();
    let mut values = DMatrix::zeros(unlabeled.len(), c);
    for (row, &u) in unlabeled.iter().enumerate() {
        let mut total = 0.0;
        for (v, w) in g.neighbors(u) {
            if let Some(k) = class_of[v] {
                values[(row, k)] += w;
                total += w;
            }
        }
        for k in 0..c {
            values[(row, k)] = cfg.rate() * (values[(row, k)] - total / c as f64);
        }
    }
    Ok(ResidualBeliefs { values })
}

fn adjacency_into(g: &Graph, v: &[f64], out: &mut [f64]) {
    parallel::fill_indexed(out, |u| g.neighbors(u).map(|(j, w)| w * v[j]).sum());
}

/// Iterates `p̂ ← φ̂ + (ε/c) W p̂` from `p̂ = φ̂` on `g` (normally the subgraph
/// induced by the unlabeled nodes), one class column at a time.
pub fn linbp_run(g: &Graph, priors: &ResidualBeliefs, cfg: &LinBpConfig) -> Result<LinBpRun> {
    check_len("prior rows", g.num_nodes(), priors.num_nodes())?;
    check_len("prior classes", cfg.num_classes(), priors.num_classes())?;
    let rate = cfg.rate();
    let budget = cfg.budget();
    let n = g.num_nodes();
    let columns = parallel::map_indexed(priors.num_classes(), |k| -> Result<(Vec<f64>, usize, bool)> {
        let phi: Vec<f64> = priors.values().column(k).iter().copied().collect();
        match budget.solver {
            Solver::FixedPoint => {
                let fp = crate::algorithms::iterate(phi.clone(), budget, |cur, next| {
                    adjacency_into(g, cur, next);
                    for (o, f) in next.iter_mut().zip(&phi) {
                        *o = f + rate * *o;
                    }
                });
                Ok((fp.values, fp.iterations, fp.converged))
            }
            Solver::ConjugateGradient => {
                let op = FnOperator::new(n, |v: &[f64], out: &mut [f64]| {
                    adjacency_into(g, v, out);
                    for (o, x) in out.iter_mut().zip(v) {
                        *o = x - rate * *o;
                    }
                });
                let cfg = CgConfig {
                    rel_tolerance: budget.rel_change_tolerance,
                    max_iterations: Some(budget.max_iterations),
                };
                let sol = conjugate_gradient_run(&op, &phi, None, &cfg)?;
                Ok((sol.x, sol.iterations, sol.converged))
            }
        }
    });
    let mut values = DMatrix::zeros(n, priors.num_classes());
    let mut iterations = 0;
    let mut converged = true;
    for (k, col) in columns.into_iter().enumerate() {
        let (v, it, ok) = col?;
        values.set_column(k, &nalgebra::DVector::from_vec(v));
        iterations = iterations.max(it);
        converged &= ok;
    }
    if !converged {
        log::warn!("LinBP stopped after {iterations} iterations without converging");
    }
    Ok(LinBpRun { beliefs: ResidualBeliefs { values }, iterations, converged })
}

/// Fixed point of the update before the second-order terms in `ε` are
/// dropped: with `γ = 1 / (1 − ε²/c²)`,
/// `p̂_u = φ̂_u + (γε/c) Σ_v W_uv p̂_v − (γε²/c²) d_u p̂_u`.
/// It differs from [`linbp_run`]'s fixed point by `O(ε²)`.
pub fn linbp_second_order(g: &Graph, priors: &ResidualBeliefs, cfg: &LinBpConfig) -> Result<LinBpRun> {
    check_len("prior rows", g.num_nodes(), priors.num_nodes())?;
    let rate = cfg.rate();
    let gamma = 1.0 / (1.0 - rate * rate);
    let budget = cfg.budget();
    let mut values = DMatrix::zeros(g.num_nodes(), priors.num_classes());
    let mut iterations = 0;
    let mut converged = true;
    for k in 0..priors.num_classes() {
        let phi: Vec<f64> = priors.values().column(k).iter().copied().collect();
        let fp = crate::algorithms::iterate(phi.clone(), budget, |cur, next| {
            adjacency_into(g, cur, next);
            for (u, o) in next.iter_mut().enumerate() {
                *o = (phi[u] + gamma * rate * *o) / (1.0 + gamma * rate * rate * g.degree(u));
            }
        });
        iterations = iterations.max(fp.iterations);
        converged &= fp.converged;
        values.set_column(k, &nalgebra::DVector::from_vec(fp.values));
    }
    Ok(LinBpRun { beliefs: ResidualBeliefs { values }, iterations, converged })
}

/// Row-wise argmax, ties to the lowest class index.
pub fn linbp_classify(beliefs: &ResidualBeliefs) -> Vec<usize> {
    beliefs
        .values()
        .row_iter()
        .map(|row| {
            let mut best = 0;
            for k in 1..row.len() {
                if row[k] > row[best] {
                    best = k;
                }
            }
            best
        })
        .collect()
}

/// Classifies every node: labeled nodes keep their class, unlabeled nodes
/// take the argmax of LinBP run on the subgraph they induce, seeded with the
/// priors from their labeled neighbors.
pub fn linbp_predict(g: &Graph, labeled: &NodeIndexSet, labels: &[usize], cfg: &LinBpConfig) -> Result<Vec<usize>> {
    let priors = residual_priors_from_labels(g, labeled, labels, cfg)?;
    let unlabeled = labeled.complement();
    let sub = g.induced_subgraph(&unlabeled)?;
    let run = linbp_run(&sub, &priors, cfg)?;
    let mut out = vec![0; g.num_nodes()];
    for (&u, &k) in labeled.iter().zip(labels) {
        out[u] = k;
    }
    for (&u, k) in unlabeled.iter().zip(linbp_classify(&run.beliefs)) {
        out[u] = k;
    }
    Ok(out)
}
