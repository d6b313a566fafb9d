use std::collections::BTreeSet;

use rand::Rng;

use super::Graph;
use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Watts–Strogatz small-world graph with unit weights.
///
/// Starts from a ring lattice where node `u` links to the `avg_degree / 2`
/// nodes following it, then visits every lattice edge `(u, u + j)` (by offset
/// `j`, then by `u`) and with probability `rewire_prob` moves its far end to a
/// uniformly random node that is neither `u` nor already adjacent to `u`.
/// Edge count is preserved; connectivity is not guaranteed.
pub fn watts_strogatz(n: usize, avg_degree: usize, rewire_prob: f64, seed: u64) -> Result<Graph> {
    if !avg_degree.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("avg_degree must be even, got {avg_degree}")));
    }
    if avg_degree >= n {
        return Err(Error::InvalidArgument(format!(
            "avg_degree {avg_degree} must be smaller than n = {n}"
        )));
    }
    if !(0.0..=1.0).contains(&rewire_prob) {
        return Err(Error::InvalidArgument(format!(
            "rewire_prob must lie in [0, 1], got {rewire_prob}"
        )));
    }

    let half = avg_degree / 2;
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=half {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }

    let mut rng = rng_from_seed(seed);
    for j in 1..=half {
        for u in 0..n {
            let v = (u + j) % n;
            if !adj[u].contains(&v) || !rng.random_bool(rewire_prob) {
                continue;
            }
            if adj[u].len() >= n - 1 {
                continue;
            }
            let w = loop {
                let w = rng.random_range(0..n);
                if w != u && !adj[u].contains(&w) {
                    break w;
                }
            };
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }

    let edges: Vec<_> = adj
        .iter()
        .enumerate()
        .flat_map(|(u, nbrs)| nbrs.iter().filter(move |&&v| u < v).map(move |&v| (u, v, 1.0)))
        .collect();
    Graph::from_edges(n, edges)
}
