//! Sparse undirected graphs and the normalized operators built on them.
//!
//! Operators are applied matrix-free:
//!
//! - `S  = D^{-1/2} W D^{-1/2}` ([`Graph::apply_normalized_adjacency`])
//! - `N  = I - S` ([`Graph::apply_normalized_laplacian`])
//! - `S̃ = (D+I)^{-1/2} (W+I) (D+I)^{-1/2}` ([`Graph::apply_selfloop_adjacency`])
//!
//! Isolated nodes use the convention `d^{-1/2} = 0`, so `S` has a zero row
//! and column there and `N` acts as the identity on them.

mod generate;
mod io;
mod spectrum;

pub use generate::watts_strogatz;
pub use io::{load_attributes, load_edge_list};
pub use spectrum::LaplacianSpectrum;

use std::collections::BTreeMap;

use nalgebra::DMatrix;

use crate::error::{check_len, Error, Result};
use crate::parallel;

/// Immutable weighted undirected graph in compressed sparse row form.
///
/// Each undirected edge is stored in both endpoint rows. Self-loops are never
/// stored.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    weights: Vec<f64>,
    /// `w_uv / sqrt(d_u d_v)`, aligned with `neighbors`.
    normalized: Vec<f64>,
    degree: Vec<f64>,
    inv_sqrt_degree: Vec<f64>,
    inv_sqrt_degree_loop: Vec<f64>,
    node_ids: Option<Vec<String>>,
}

impl Graph {
    /// Builds a graph on `n` nodes from undirected `(u, v, weight)` triples.
    ///
    /// Repeated edges (in either orientation) merge by summing weights.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop on node {u}")));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "edge ({u}, {v}) has invalid weight {w}"
                )));
            }
            *merged.entry((u.min(v), u.max(v))).or_insert(0.0) += w;
        }

        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (&(u, v), &w) in &merged {
            rows[u].push((v, w));
            rows[v].push((u, w));
        }

        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity(2 * merged.len());
        let mut weights = Vec::with_capacity(2 * merged.len());
        offsets.push(0);
        for row in &mut rows {
            row.sort_unstable_by_key(|&(v, _)| v);
            for &(v, w) in row.iter() {
                neighbors.push(v);
                weights.push(w);
            }
            offsets.push(neighbors.len());
        }

        let degree: Vec<f64> = (0..n)
            .map(|u| weights[offsets[u]..offsets[u + 1]].iter().sum())
            .collect();
        let inv_sqrt_degree: Vec<f64> = degree
            .iter()
            .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
            .collect();
        let inv_sqrt_degree_loop: Vec<f64> = degree.iter().map(|&d| 1.0 / (d + 1.0).sqrt()).collect();
        let mut normalized = vec![0.0; neighbors.len()];
        for u in 0..n {
            for k in offsets[u]..offsets[u + 1] {
                normalized[k] = weights[k] * inv_sqrt_degree[u] * inv_sqrt_degree[neighbors[k]];
            }
        }

        Ok(Self {
            n,
            offsets,
            neighbors,
            weights,
            normalized,
            degree,
            inv_sqrt_degree,
            inv_sqrt_degree_loop,
            node_ids: None,
        })
    }

    /// Graph on `n` nodes without edges.
    pub fn edgeless(n: usize) -> Self {
        Self::from_edges(n, std::iter::empty()).expect("edgeless graph is always valid")
    }

    /// Attaches external node identifiers (one per node).
    pub fn with_node_ids(mut self, ids: Vec<String>) -> Result<Self> {
        check_len("node ids", self.n, ids.len())?;
        self.node_ids = Some(ids);
        Ok(self)
    }

    pub fn num_nodes(&self) -> usize {
        self.n
    }

    /// Number of undirected edges.
    pub fn num_edges(&self) -> usize {
        self.neighbors.len() / 2
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degree
    }

    pub fn degree(&self, u: usize) -> f64 {
        self.degree[u]
    }

    /// `(neighbor, weight)` pairs of `u`, sorted by neighbor index.
    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[u]..self.offsets[u + 1];
        self.neighbors[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    /// Undirected edges `(u, v, w)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&(v, _)| u < v)
                .map(move |(v, w)| (u, v, w))
        })
    }

    /// External identifier of node `u`, falling back to its index.
    pub fn node_id(&self, u: usize) -> String {
        match &self.node_ids {
            Some(ids) => ids[u].clone(),
            None => u.to_string(),
        }
    }

    pub fn node_ids(&self) -> Option<&[String]> {
        self.node_ids.as_deref()
    }

    /// `S v` with `S = D^{-1/2} W D^{-1/2}`.
    pub fn apply_normalized_adjacency(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("normalized adjacency", self.n, v.len())?;
        let mut out = vec![0.0; self.n];
        self.normalized_adjacency_into(v, &mut out);
        Ok(out)
    }

    /// `N v = v - S v`.
    pub fn apply_normalized_laplacian(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("normalized laplacian", self.n, v.len())?;
        let mut out = vec![0.0; self.n];
        self.normalized_laplacian_into(v, &mut out);
        Ok(out)
    }

    /// `S̃ v` with `S̃ = (D+I)^{-1/2} (W+I) (D+I)^{-1/2}`.
    pub fn apply_selfloop_adjacency(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("self-loop adjacency", self.n, v.len())?;
        let mut out = vec![0.0; self.n];
        self.selfloop_adjacency_into(v, &mut out);
        Ok(out)
    }

    /// Unnormalized `W v`.
    pub fn apply_adjacency(&self, v: &[f64]) -> Result<Vec<f64>> {
        check_len("adjacency", self.n, v.len())?;
        let mut out = vec![0.0; self.n];
        parallel::fill_indexed(&mut out, |u| {
            let (lo, hi) = (self.offsets[u], self.offsets[u + 1]);
            self.neighbors[lo..hi]
                .iter()
                .zip(&self.weights[lo..hi])
                .map(|(&j, &w)| w * v[j])
                .sum()
        });
        Ok(out)
    }

    pub(crate) fn normalized_adjacency_into(&self, v: &[f64], out: &mut [f64]) {
        parallel::fill_indexed(out, |u| self.normalized_row_dot(u, v));
    }

    pub(crate) fn normalized_laplacian_into(&self, v: &[f64], out: &mut [f64]) {
        parallel::fill_indexed(out, |u| v[u] - self.normalized_row_dot(u, v));
    }

    pub(crate) fn selfloop_adjacency_into(&self, v: &[f64], out: &mut [f64]) {
        parallel::fill_indexed(out, |u| {
            let su = self.inv_sqrt_degree_loop[u];
            let (lo, hi) = (self.offsets[u], self.offsets[u + 1]);
            let off: f64 = self.neighbors[lo..hi]
                .iter()
                .zip(&self.weights[lo..hi])
                .map(|(&j, &w)| w * self.inv_sqrt_degree_loop[j] * v[j])
                .sum();
            su * (su * v[u] + off)
        });
    }

    /// Row `u` of `S` dotted with `v`.
    #[inline]
    pub(crate) fn normalized_row_dot(&self, u: usize, v: &[f64]) -> f64 {
        let (lo, hi) = (self.offsets[u], self.offsets[u + 1]);
        self.neighbors[lo..hi]
            .iter()
            .zip(&self.normalized[lo..hi])
            .map(|(&j, &s)| s * v[j])
            .sum()
    }

    /// Dense `W`.
    pub fn dense_adjacency(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for (u, v, w) in self.edges() {
            m[(u, v)] = w;
            m[(v, u)] = w;
        }
        m
    }

    /// Dense `S`.
    pub fn dense_normalized_adjacency(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for u in 0..self.n {
            for k in self.offsets[u]..self.offsets[u + 1] {
                m[(u, self.neighbors[k])] = self.normalized[k];
            }
        }
        m
    }

    /// Dense `N = I - S`.
    pub fn dense_normalized_laplacian(&self) -> DMatrix<f64> {
        DMatrix::identity(self.n, self.n) - self.dense_normalized_adjacency()
    }

    /// Dense `S̃`.
    pub fn dense_selfloop_adjacency(&self) -> DMatrix<f64> {
        let mut m = self.dense_adjacency() + DMatrix::identity(self.n, self.n);
        for u in 0..self.n {
            for v in 0..self.n {
                m[(u, v)] *= self.inv_sqrt_degree_loop[u] * self.inv_sqrt_degree_loop[v];
            }
        }
        m
    }

    /// `vᵀ N v` as the edge sum `Σ w_uv (v_u/√d_u − v_v/√d_v)²` plus `v_u²`
    /// for isolated nodes.
    pub fn laplacian_quadratic_form(&self, v: &[f64]) -> Result<f64> {
        check_len("laplacian quadratic form", self.n, v.len())?;
        let edges: f64 = self
            .edges()
            .map(|(a, b, w)| {
                let diff = v[a] * self.inv_sqrt_degree[a] - v[b] * self.inv_sqrt_degree[b];
                w * diff * diff
            })
            .sum();
        let isolated: f64 = (0..self.n)
            .filter(|&u| self.degree[u] == 0.0)
            .map(|u| v[u] * v[u])
            .sum();
        Ok(edges + isolated)
    }

    /// Subgraph induced by `nodes`; node `k` of the result is `nodes[k]`.
    pub fn induced_subgraph(&self, nodes: &NodeIndexSet) -> Result<Graph> {
        if nodes.universe() != self.n {
            return Err(Error::InvalidArgument(format!(
                "node set over {} nodes used with a graph of {} nodes",
                nodes.universe(),
                self.n
            )));
        }
        let mut position = vec![usize::MAX; self.n];
        for (k, &u) in nodes.iter().enumerate() {
            position[u] = k;
        }
        let edges: Vec<_> = self
            .edges()
            .filter(|&(u, v, _)| position[u] != usize::MAX && position[v] != usize::MAX)
            .map(|(u, v, w)| (position[u], position[v], w))
            .collect();
        Graph::from_edges(nodes.len(), edges)
    }

    /// Disjoint union: nodes of `other` are shifted by `self.num_nodes()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.n;
        let edges = self
            .edges()
            .chain(other.edges().map(|(u, v, w)| (u + shift, v + shift, w)));
        let g = Graph::from_edges(self.n + other.n, edges.collect::<Vec<_>>())
            .expect("union of valid graphs is valid");
        match (&self.node_ids, &other.node_ids) {
            (None, None) => g,
            _ => {
                let ids = (0..self.n)
                    .map(|u| self.node_id(u))
                    .chain((0..other.n).map(|u| other.node_id(u)))
                    .collect();
                g.with_node_ids(ids).expect("id count matches")
            }
        }
    }

    /// Power-iteration estimate of the spectral radius of `W`.
    ///
    /// Iterates on `W + I` (nonnegative, aperiodic) so bipartite components
    /// do not make the iteration oscillate.
    pub fn adjacency_spectral_radius(&self, iterations: usize) -> f64 {
        if self.num_edges() == 0 {
            return 0.0;
        }
        let mut x = vec![1.0 / (self.n as f64).sqrt(); self.n];
        let mut estimate = 0.0;
        for _ in 0..iterations {
            let wx = self.apply_adjacency(&x).expect("length matches");
            let y: Vec<f64> = wx.iter().zip(&x).map(|(a, b)| a + b).collect();
            let norm = y.iter().map(|a| a * a).sum::<f64>().sqrt();
            let next = norm - 1.0;
            x = y.into_iter().map(|a| a / norm).collect();
            if (next - estimate).abs() <= 1e-12 * next.abs().max(1.0) {
                estimate = next;
                break;
            }
            estimate = next;
        }
        // Rayleigh quotient is exact at convergence and a lower bound otherwise.
        let wx = self.apply_adjacency(&x).expect("length matches");
        let rq: f64 = wx.iter().zip(&x).map(|(a, b)| a * b).sum();
        rq.max(estimate)
    }
}

/// Sorted set of distinct node indices drawn from `0..universe`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeIndexSet {
    universe: usize,
    indices: Vec<usize>,
}

impl NodeIndexSet {
    /// Builds a set from arbitrary-order indices; rejects duplicates and
    /// out-of-range entries.
    pub fn new(mut indices: Vec<usize>, universe: usize) -> Result<Self> {
        indices.sort_unstable();
        if let Some(&last) = indices.last() {
            if last >= universe {
                return Err(Error::InvalidArgument(format!(
                    "node index {last} out of range for {universe} nodes"
                )));
            }
        }
        if indices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("duplicate node index".into()));
        }
        Ok(Self { universe, indices })
    }

    pub fn all(universe: usize) -> Self {
        Self {
            universe,
            indices: (0..universe).collect(),
        }
    }

    pub fn empty(universe: usize) -> Self {
        Self {
            universe,
            indices: Vec::new(),
        }
    }

    pub fn complement(&self) -> Self {
        let mask = self.mask();
        Self {
            universe: self.universe,
            indices: (0..self.universe).filter(|&u| !mask[u]).collect(),
        }
    }

    /// Membership mask of length `universe`.
    pub fn mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.universe];
        for &u in &self.indices {
            mask[u] = true;
        }
        mask
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.indices
    }

    pub fn iter(&self) -> std::slice::Iter<'_, usize> {
        self.indices.iter()
    }

    pub fn contains(&self, u: usize) -> bool {
        self.indices.binary_search(&u).is_ok()
    }

    /// Entries of `values` (length `universe`) at this set's indices.
    pub fn gather(&self, values: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&u| values[u]).collect()
    }

    /// Writes `values[k]` to `target[self[k]]`.
    pub fn scatter(&self, values: &[f64], target: &mut [f64]) {
        for (&u, &x) in self.indices.iter().zip(values) {
            target[u] = x;
        }
    }
}

impl<'a> IntoIterator for &'a NodeIndexSet {
    type Item = &'a usize;
    type IntoIter = std::slice::Iter<'a, usize>;

    fn into_iter(self) -> Self::IntoIter {
        self.indices.iter()
    }
}
