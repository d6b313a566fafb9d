use nalgebra::DMatrix;

use super::smoothing::{cg_solve, iterate, smooth_features, FixedPoint, Smoothed};
use super::{PropagationBudget, SmoothingParam, Solver};
use crate::error::{check_len, Error, Result};
use crate::eval::SplitSpec;
use crate::graph::{Graph, NodeIndexSet};
use crate::linalg::FnOperator;
use crate::parallel;

/// Outcome of a constrained propagation, one value per unlabeled node in
/// ascending node order.
#[derive(Debug, Clone, PartialEq)]
pub struct Propagation {
    pub values: Vec<f64>,
    pub iterations: usize,
    /// False when the iteration budget ran out; `values` then holds the last
    /// iterate.
    pub converged: bool,
    /// Relative change (fixed point) or relative residual (CG) at exit.
    pub final_change: f64,
}

impl Propagation {
    fn from_fixed_point(fp: FixedPoint) -> Self {
        if !fp.converged {
            log::warn!(
                "label propagation stopped at relative change {:.3e} after {} iterations",
                fp.change,
                fp.iterations
            );
        }
        Self {
            values: fp.values,
            iterations: fp.iterations,
            converged: fp.converged,
            final_change: fp.change,
        }
    }

    /// Full-length vector: `y_L` on labeled nodes, predictions elsewhere.
    pub fn to_full(&self, split: &SplitSpec) -> Vec<f64> {
        let mut out = vec![0.0; split.num_nodes()];
        split.labeled().scatter(split.y_labeled(), &mut out);
        split.unlabeled().scatter(&self.values, &mut out);
        out
    }
}

/// Label propagation with the labeled values held fixed.
///
/// Iterates `y_u ← α Σ_v S_uv y_v` over unlabeled `u` from `y_U = 0`, or with
/// [`Solver::ConjugateGradient`] solves
/// `((1+ω) I − ω S_UU) y_U = ω S_UL y_L`. Both give
/// `−(I+ωN)_UU^{-1} (I+ωN)_UL y_L`.
pub fn label_propagation(
    g: &Graph,
    split: &SplitSpec,
    s: SmoothingParam,
    budget: &PropagationBudget,
) -> Result<Propagation> {
    budget.validate()?;
    split.check_graph(g)?;
    let unlabeled = split.unlabeled().as_slice();
    let m = unlabeled.len();
    let alpha = s.alpha();
    if alpha == 0.0 || m == 0 {
        return Ok(Propagation { values: vec![0.0; m], iterations: 0, converged: true, final_change: 0.0 });
    }
    let mut pinned = vec![0.0; g.num_nodes()];
    split.labeled().scatter(split.y_labeled(), &mut pinned);

    let fp = match budget.solver {
        Solver::FixedPoint => {
            let mut full = pinned.clone();
            iterate(vec![0.0; m], budget, |cur, next| {
                for (&u, &v) in unlabeled.iter().zip(cur) {
                    full[u] = v;
                }
                let full = &full;
                parallel::fill_indexed(next, |k| alpha * g.normalized_row_dot(unlabeled[k], full));
            })
        }
        Solver::ConjugateGradient => {
            let omega = s.omega();
            let rhs: Vec<f64> = unlabeled.iter().map(|&u| omega * g.normalized_row_dot(u, &pinned)).collect();
            let op = FnOperator::new(m, |v: &[f64], out: &mut [f64]| {
                let mut full = vec![0.0; g.num_nodes()];
                for (&u, &x) in unlabeled.iter().zip(v) {
                    full[u] = x;
                }
                let full = &full;
                parallel::fill_indexed(out, |k| (1.0 + omega) * v[k] - omega * g.normalized_row_dot(unlabeled[k], full));
            });
            cg_solve(&op, &rhs, budget)?
        }
    };
    Ok(Propagation::from_fixed_point(fp))
}

/// Propagates the labeled residuals `y_L − base_L` and adds them back:
/// returns `base_U + r̄_U`.
pub fn residual_propagation(
    g: &Graph,
    base: &[f64],
    split: &SplitSpec,
    s: SmoothingParam,
    budget: &PropagationBudget,
) -> Result<Propagation> {
    check_len("base prediction", g.num_nodes(), base.len())?;
    let residuals: Vec<f64> = split
        .labeled()
        .iter()
        .zip(split.y_labeled())
        .map(|(&u, &y)| y - base[u])
        .collect();
    let mut prop = label_propagation(g, &split.with_labels(residuals)?, s, budget)?;
    for (v, &u) in prop.values.iter_mut().zip(split.unlabeled()) {
        *v += base[u];
    }
    Ok(prop)
}

/// Unconstrained propagation updating every node:
/// the fixed point of `F ← (1−α) F⁰ + α S F`, i.e. `(1−α)(I − αS)^{-1} F⁰`,
/// column by column.
pub fn label_propagation_unconstrained(
    g: &Graph,
    initial: &DMatrix<f64>,
    alpha: f64,
    budget: &PropagationBudget,
) -> Result<Smoothed> {
    smooth_features(g, initial, SmoothingParam::from_alpha(alpha)?, budget)
}

/// Multi-class label propagation: one constrained propagation per class on
/// its indicator, then argmax (ties to the lowest class). Returns a class for
/// every node; labeled nodes keep their own class.
pub fn label_propagation_multiclass(
    g: &Graph,
    labeled: &NodeIndexSet,
    classes: &[usize],
    num_classes: usize,
    s: SmoothingParam,
    budget: &PropagationBudget,
) -> Result<Vec<usize>> {
    check_len("class labels", labeled.len(), classes.len())?;
    if num_classes == 0 {
        return Err(Error::InvalidArgument("need at least one class".into()));
    }
    if let Some(&bad) = classes.iter().find(|&&c| c >= num_classes) {
        return Err(Error::InvalidArgument(format!("class {bad} out of range for {num_classes} classes")));
    }
    let base = SplitSpec::new(labeled.clone(), vec![0.0; labeled.len()])?;
    let scores = (0..num_classes)
        .map(|k| {
            let indicator = classes.iter().map(|&c| if c == k { 1.0 } else { 0.0 }).collect();
            label_propagation(g, &base.with_labels(indicator)?, s, budget).map(|p| p.values)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![0; g.num_nodes()];
    for (&u, &c) in labeled.iter().zip(classes) {
        out[u] = c;
    }
    for (i, &u) in base.unlabeled().iter().enumerate() {
        let mut best = 0;
        for k in 1..num_classes {
            if scores[k][i] > scores[best][i] {
                best = k;
            }
        }
        out[u] = best;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::watts_strogatz;
    use crate::linalg::dense::submatrix;
    use crate::rng::rng_from_seed;
    use proptest::prelude::*;
    use rand_distr::{Distribution, StandardNormal};

    fn dense_lp(g: &Graph, split: &SplitSpec, omega: f64) -> Vec<f64> {
        let n = g.num_nodes();
        let m = DMatrix::identity(n, n) + g.dense_normalized_laplacian() * omega;
        let (l, u) = (split.labeled().as_slice(), split.unlabeled().as_slice());
        let muu = submatrix(&m, u, u);
        let mul = submatrix(&m, u, l);
        let rhs = -(mul * nalgebra::DVector::from_column_slice(split.y_labeled()));
        muu.cholesky().unwrap().solve(&rhs).iter().copied().collect()
    }

    fn random_split_spec(n: usize, seed: u64) -> SplitSpec {
        let mut rng = rng_from_seed(seed);
        let labeled = crate::eval::random_split(n, 0.3, seed).unwrap();
        let y: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        SplitSpec::from_outcome(labeled, &y).unwrap()
    }

    fn tight() -> PropagationBudget {
        PropagationBudget { max_iterations: 100_000, rel_change_tolerance: 1e-13, ..Default::default() }
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn zero_omega_gives_zeros() {
        let g = watts_strogatz(20, 4, 0.1, 1).unwrap();
        let split = random_split_spec(20, 2);
        let p = label_propagation(&g, &split, SmoothingParam::from_omega(0.0).unwrap(), &Default::default()).unwrap();
        assert!(p.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_node_path_gives_alpha() {
        let g = Graph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let split = SplitSpec::new(NodeIndexSet::new(vec![1], 2).unwrap(), vec![1.0]).unwrap();
        for omega in [0.3, 1.0, 7.0] {
            let s = SmoothingParam::from_omega(omega).unwrap();
            for solver in [Solver::FixedPoint, Solver::ConjugateGradient] {
                let p = label_propagation(&g, &split, s, &tight().with_solver(solver)).unwrap();
                assert!((p.values[0] - s.alpha()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn matches_dense_oracle_on_random_graphs() {
        for seed in 0..5 {
            let g = watts_strogatz(50, 4, 0.2, seed).unwrap();
            let split = random_split_spec(50, seed + 10);
            for omega in [0.1, 1.0, 10.0] {
                let want = dense_lp(&g, &split, omega);
                let s = SmoothingParam::from_omega(omega).unwrap();
                for solver in [Solver::FixedPoint, Solver::ConjugateGradient] {
                    let got = label_propagation(&g, &split, s, &tight().with_solver(solver)).unwrap();
                    assert!(got.converged);
                    assert!(max_diff(&got.values, &want) < 1e-8, "seed {seed} omega {omega} {solver:?}");
                }
            }
        }
    }

    #[test]
    fn iterate_changes_contract_at_rate_alpha() {
        let g = watts_strogatz(80, 4, 0.1, 3).unwrap();
        let split = random_split_spec(80, 4);
        let s = SmoothingParam::from_omega(3.0).unwrap();
        let iterates: Vec<Vec<f64>> = (1..60)
            .map(|t| {
                let budget = PropagationBudget { max_iterations: t, rel_change_tolerance: 1e-300, ..Default::default() };
                label_propagation(&g, &split, s, &budget).unwrap().values
            })
            .collect();
        let changes: Vec<f64> = iterates.windows(2).map(|w| max_diff(&w[1], &w[0])).collect();
        let ratios: Vec<f64> = changes.windows(2).skip(10).map(|w| w[1] / w[0]).collect();
        assert!(ratios.iter().all(|&r| r < s.alpha() + 0.05), "{ratios:?}");
    }

    #[test]
    fn exhausted_budget_is_flagged() {
        let g = watts_strogatz(100, 4, 0.1, 3).unwrap();
        let split = random_split_spec(100, 4);
        let budget = PropagationBudget { max_iterations: 3, ..Default::default() };
        let p = label_propagation(&g, &split, SmoothingParam::from_omega(50.0).unwrap(), &budget).unwrap();
        assert!(!p.converged);
        assert_eq!(p.iterations, 3);
    }

    #[test]
    fn residual_propagation_edge_cases() {
        let g = watts_strogatz(40, 4, 0.1, 5).unwrap();
        let split = random_split_spec(40, 6);
        let s = SmoothingParam::from_omega(2.0).unwrap();
        let zero = vec![0.0; 40];
        let rp = residual_propagation(&g, &zero, &split, s, &tight()).unwrap();
        let lp = label_propagation(&g, &split, s, &tight()).unwrap();
        assert!(max_diff(&rp.values, &lp.values) < 1e-14);

        let base: Vec<f64> = (0..40).map(|u| u as f64 * 0.1).collect();
        let exact = split.with_labels(split.labeled().gather(&base)).unwrap();
        let rp = residual_propagation(&g, &base, &exact, s, &tight()).unwrap();
        assert!(max_diff(&rp.values, &exact.unlabeled().gather(&base)) < 1e-14);
    }

    #[test]
    fn unconstrained_propagation() {
        let g = Graph::from_edges(2, [(0, 1, 1.0)]).unwrap();
        let f0 = DMatrix::from_column_slice(2, 1, &[1.0, 0.0]);
        let f = label_propagation_unconstrained(&g, &f0, 0.5, &tight()).unwrap().values;
        let s = g.dense_normalized_adjacency();
        let want = (DMatrix::identity(2, 2) - s * 0.5).try_inverse().unwrap() * &f0 * 0.5;
        assert!((f - want).abs().max() < 1e-12);

        let e = Graph::edgeless(3);
        let f0 = DMatrix::from_column_slice(3, 1, &[1.0, -2.0, 3.0]);
        let f = label_propagation_unconstrained(&e, &f0, 0.7, &tight()).unwrap().values;
        assert!((f - &f0 * 0.3).abs().max() < 1e-15);
        let f = label_propagation_unconstrained(&g, &DMatrix::from_column_slice(2, 1, &[1.0, 0.0]), 0.0, &tight());
        assert_eq!(f.unwrap().values.as_slice(), &[1.0, 0.0]);
    }

    #[test]
    fn multiclass_on_two_cliques() {
        let mut edges = Vec::new();
        for a in 0..4 {
            for b in a + 1..4 {
                edges.push((a, b, 1.0));
                edges.push((a + 4, b + 4, 1.0));
            }
        }
        edges.push((3, 4, 1.0));
        let g = Graph::from_edges(8, edges).unwrap();
        let labeled = NodeIndexSet::new(vec![0, 7], 8).unwrap();
        let s = SmoothingParam::from_omega(5.0).unwrap();
        let c = label_propagation_multiclass(&g, &labeled, &[1, 2], 3, s, &tight()).unwrap();
        assert_eq!(c, vec![1, 1, 1, 1, 2, 2, 2, 2]);
        assert!(label_propagation_multiclass(&g, &labeled, &[1, 3], 3, s, &tight()).is_err());
        // Unreachable nodes score zero everywhere and fall to class 0.
        let c = label_propagation_multiclass(&Graph::edgeless(3), &NodeIndexSet::new(vec![0], 3).unwrap(), &[2], 3, s, &tight()).unwrap();
        assert_eq!(c, vec![2, 0, 0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn fixed_point_matches_dense(seed in 0u64..1000, omega in 0.01f64..20.0) {
            let g = watts_strogatz(30, 4, 0.3, seed).unwrap();
            let split = random_split_spec(30, seed ^ 7);
            let got = label_propagation(&g, &split, SmoothingParam::from_omega(omega).unwrap(), &tight()).unwrap();
            prop_assert!(max_diff(&got.values, &dense_lp(&g, &split, omega)) < 1e-8);
        }
    }
}
