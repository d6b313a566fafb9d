use rand::seq::SliceRandom;

use crate::error::{check_len, Error, Result};
use crate::graph::{Graph, NodeIndexSet};
use crate::rng::rng_from_seed;

/// Whether training and test nodes live in one graph or in two.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitKind {
    #[default]
    Transductive,
    /// Training graph and test graph joined as a disjoint union.
    Inductive,
}

/// Labeled nodes `L` with their outcomes `y_L`, and the unlabeled rest `U`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSpec {
    labeled: NodeIndexSet,
    unlabeled: NodeIndexSet,
    y_labeled: Vec<f64>,
    kind: SplitKind,
}

impl SplitSpec {
    /// `y_labeled[k]` is the outcome of node `labeled[k]` (sorted order).
    pub fn new(labeled: NodeIndexSet, y_labeled: Vec<f64>) -> Result<Self> {
        check_len("labeled outcomes", labeled.len(), y_labeled.len())?;
        let unlabeled = labeled.complement();
        Ok(Self {
            labeled,
            unlabeled,
            y_labeled,
            kind: SplitKind::Transductive,
        })
    }

    /// Takes `y_L` from a full-length outcome vector.
    pub fn from_outcome(labeled: NodeIndexSet, y: &[f64]) -> Result<Self> {
        check_len("outcome vector", labeled.universe(), y.len())?;
        let y_labeled = labeled.gather(y);
        Self::new(labeled, y_labeled)
    }

    pub fn with_kind(mut self, kind: SplitKind) -> Self {
        self.kind = kind;
        self
    }

    /// Same node sets with different observed values.
    pub fn with_labels(&self, y_labeled: Vec<f64>) -> Result<Self> {
        check_len("labeled outcomes", self.labeled.len(), y_labeled.len())?;
        Ok(Self {
            y_labeled,
            ..self.clone()
        })
    }

    /// Keeps only the labeled nodes in `keep` (a subset of `L`); the rest
    /// join `U`.
    pub fn restrict_labeled(&self, keep: &NodeIndexSet) -> Result<Self> {
        let mut y = Vec::with_capacity(keep.len());
        for &u in keep {
            let pos = self
                .labeled
                .as_slice()
                .binary_search(&u)
                .map_err(|_| Error::InvalidArgument(format!("node {u} is not labeled")))?;
            y.push(self.y_labeled[pos]);
        }
        Ok(Self::new(keep.clone(), y)?.with_kind(self.kind))
    }

    pub fn labeled(&self) -> &NodeIndexSet {
        &self.labeled
    }

    pub fn unlabeled(&self) -> &NodeIndexSet {
        &self.unlabeled
    }

    pub fn y_labeled(&self) -> &[f64] {
        &self.y_labeled
    }

    pub fn kind(&self) -> SplitKind {
        self.kind
    }

    pub fn num_nodes(&self) -> usize {
        self.labeled.universe()
    }

    pub(crate) fn check_graph(&self, g: &Graph) -> Result<()> {
        check_len("split size", g.num_nodes(), self.num_nodes())?;
        if self.labeled.is_empty() {
            return Err(Error::InvalidArgument("no labeled nodes".into()));
        }
        Ok(())
    }
}

/// Uniformly random labeled set of `round(train_fraction · n)` nodes
/// (at least one).
pub fn random_split(n: usize, train_fraction: f64, seed: u64) -> Result<NodeIndexSet> {
    if !(train_fraction > 0.0 && train_fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!("train fraction must lie in (0, 1], got {train_fraction}")));
    }
    let count = ((train_fraction * n as f64).round() as usize).clamp(1.min(n), n);
    let mut nodes: Vec<usize> = (0..n).collect();
    nodes.shuffle(&mut rng_from_seed(seed));
    nodes.truncate(count);
    NodeIndexSet::new(nodes, n)
}

/// Joins a training graph and a test graph for inductive evaluation: the
/// result is their disjoint union, with the training nodes labeled.
pub fn inductive_union(train: &Graph, test: &Graph) -> (Graph, NodeIndexSet) {
    let g = train.disjoint_union(test);
    let labeled = NodeIndexSet::new((0..train.num_nodes()).collect(), g.num_nodes()).expect("valid range");
    (g, labeled)
}
