//! Closed-form persistent graph homology.
//!
//! Under the filtration that keeps an edge while its weight exceeds the
//! threshold, components are born exactly at the weights of a maximum spanning
//! forest and cycles die at the weights of every remaining edge. One sort plus
//! a union-find pass yields both value sets.

use std::cmp::Ordering;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    num_nodes: usize,
    edges: Vec<(usize, usize, f64)>,
}

impl WeightedGraph {
    /// Validates endpoints, finiteness and uniqueness. Pairs are normalized
    /// to `i < j`.
    pub fn new(num_nodes: usize, edges: Vec<(usize, usize, f64)>) -> Result<Self> {
        let mut normalized = Vec::with_capacity(edges.len());
        for (a, b, w) in edges {
            if a >= num_nodes || b >= num_nodes {
                return Err(Error::Argument(format!(
                    "edge ({a}, {b}) out of range for {num_nodes} nodes"
                )));
            }
            if a == b {
                return Err(Error::Argument(format!("self-loop on node {a}")));
            }
            if !w.is_finite() {
                return Err(Error::Argument(format!("edge ({a}, {b}) has weight {w}")));
            }
            normalized.push((a.min(b), a.max(b), w));
        }
        let mut pairs: Vec<(usize, usize)> = normalized.iter().map(|&(i, j, _)| (i, j)).collect();
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Argument("duplicate edge".into()));
        }
        Ok(WeightedGraph {
            num_nodes,
            edges: normalized,
        })
    }

    /// For callers that already guarantee `i < j`, unique pairs and finite weights.
    pub(crate) fn from_canonical(num_nodes: usize, edges: Vec<(usize, usize, f64)>) -> Self {
        debug_assert!(edges
            .iter()
            .all(|&(i, j, w)| i < j && j < num_nodes && w.is_finite()));
        WeightedGraph { num_nodes, edges }
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }
}

pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            // path halving
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            Ordering::Less => self.parent[ra] = rb,
            Ordering::Greater => self.parent[rb] = ra,
            Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDecomposition {
    /// Maximum spanning forest weights, ascending.
    pub births: Vec<f64>,
    /// Weights of all non-forest edges, ascending.
    pub deaths: Vec<f64>,
    pub num_nodes: usize,
    /// Connected components of the full weighted graph.
    pub num_components: usize,
}

/// Kruskal over weights descending, ties broken by `(i, j)` ascending.
pub fn decompose(g: &WeightedGraph) -> PersistenceDecomposition {
    let mut order: Vec<(f64, u32, u32)> = g
        .edges
        .iter()
        .map(|&(i, j, w)| (w, i as u32, j as u32))
        .collect();
    order.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut uf = UnionFind::new(g.num_nodes);
    let mut births = Vec::with_capacity(g.num_nodes.saturating_sub(1));
    let mut deaths = Vec::with_capacity(order.len().saturating_sub(births.capacity()));
    for &(w, i, j) in &order {
        if uf.union(i as usize, j as usize) {
            births.push(w);
        } else {
            deaths.push(w);
        }
    }
    // collected in descending weight order
    births.reverse();
    deaths.reverse();
    PersistenceDecomposition {
        num_components: g.num_nodes - births.len(),
        births,
        deaths,
        num_nodes: g.num_nodes,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BettiCurve {
    pub thresholds: Vec<f64>,
    pub beta0: Vec<usize>,
    pub beta1: Vec<usize>,
}

/// Betti numbers of the thresholded graphs, from the decomposition alone.
pub fn betti_curve(d: &PersistenceDecomposition, thresholds: &[f64]) -> Result<BettiCurve> {
    if thresholds.iter().any(|t| t.is_nan()) {
        return Err(Error::Argument("NaN threshold".into()));
    }
    if thresholds.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Argument(
            "thresholds must be strictly increasing".into(),
        ));
    }
    let mut beta0 = Vec::with_capacity(thresholds.len());
    let mut beta1 = Vec::with_capacity(thresholds.len());
    for &eps in thresholds {
        let born = d.births.partition_point(|&b| b <= eps);
        let dead = d.deaths.partition_point(|&x| x <= eps);
        beta0.push(d.num_components + born);
        beta1.push(d.deaths.len() - dead);
    }
    Ok(BettiCurve {
        thresholds: thresholds.to_vec(),
        beta0,
        beta1,
    })
}

/// Reference Betti numbers: threshold, then count components directly.
pub fn betti_oracle(g: &WeightedGraph, eps: f64) -> (usize, usize) {
    let mut uf = UnionFind::new(g.num_nodes);
    let mut kept = 0usize;
    let mut components = g.num_nodes;
    for &(i, j, w) in &g.edges {
        if w > eps {
            kept += 1;
            if uf.union(i, j) {
                components -= 1;
            }
        }
    }
    (components, kept + components - g.num_nodes)
}

/// Threshold grid for Betti curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdGrid {
    /// `k` evenly spaced points over `[min weight, max weight]`.
    Uniform(usize),
    /// Every distinct edge weight.
    Weights,
}

impl std::str::FromStr for ThresholdGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "weights" {
            return Ok(ThresholdGrid::Weights);
        }
        if let Some(k) = s.strip_prefix("uniform:") {
            let k: usize = k
                .parse()
                .map_err(|_| Error::Argument(format!("bad grid size in {s:?}")))?;
            if k == 0 {
                return Err(Error::Argument(
                    "uniform grid needs at least one point".into(),
                ));
            }
            return Ok(ThresholdGrid::Uniform(k));
        }
        Err(Error::Argument(format!(
            "unknown grid {s:?} (expected uniform:K or weights)"
        )))
    }
}

impl ThresholdGrid {
    /// Empty when the decomposition has no edges.
    pub fn thresholds(self, d: &PersistenceDecomposition) -> Vec<f64> {
        let mut weights: Vec<f64> = d.births.iter().chain(&d.deaths).copied().collect();
        if weights.is_empty() {
            return Vec::new();
        }
        weights.sort_by(f64::total_cmp);
        match self {
            ThresholdGrid::Weights => {
                weights.dedup_by(|a, b| a == b);
                weights
            }
            ThresholdGrid::Uniform(k) => {
                let (lo, hi) = (weights[0], weights[weights.len() - 1]);
                if k == 1 || lo == hi {
                    return vec![lo];
                }
                let step = (hi - lo) / (k - 1) as f64;
                let mut grid: Vec<f64> = (0..k).map(|i| lo + step * i as f64).collect();
                grid[k - 1] = hi;
                grid
            }
        }
    }
}
