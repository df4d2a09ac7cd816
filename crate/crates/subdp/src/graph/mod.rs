//! Graph representation and sublinear private graph estimators.

pub mod components;
pub mod degree;
pub mod matching;

pub use components::{cc_estimate, private_cc, CcEstimator};
pub use degree::{
    advice_removal_search, private_avg_degree, private_avg_degree_opts, AdviceEstimator,
    AdviceSearchConfig, AvgDegreeOptions, DegreeEstimator, SearchOutcome,
};
pub use matching::{
    matching_coverage_bound, matching_estimate, private_matching, MatchingEstimator,
    MatchingOracle,
};

use crate::error::{Error, Result};
use std::collections::HashSet;

/// Simple undirected graph with sorted adjacency lists.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    adj: Vec<Vec<u32>>,
    m: u64,
}

impl Graph {
    /// Builds a graph on `n` vertices from an edge list. Rejects self
    /// loops, duplicate edges, and endpoints outside `[0, n)`.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Graph> {
        if n > u32::MAX as usize {
            return Err(Error::InvalidParameter(format!(
                "vertex count {n} exceeds the supported range"
            )));
        }
        let mut adj = vec![Vec::new(); n];
        let mut seen = HashSet::with_capacity(edges.len());
        for &(u, v) in edges {
            if u as usize >= n || v as usize >= n {
                return Err(Error::InvalidParameter(format!(
                    "edge ({u}, {v}) has an endpoint outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::InvalidParameter(format!("self loop at vertex {u}")));
            }
            let key = (u.min(v), u.max(v));
            if !seen.insert(key) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate edge ({}, {})",
                    key.0, key.1
                )));
            }
            adj[u as usize].push(v);
            adj[v as usize].push(u);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        Ok(Graph {
            adj,
            m: edges.len() as u64,
        })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn neighbors(&self, v: u32) -> &[u32] {
        &self.adj[v as usize]
    }

    /// Average degree `2m / n`; zero for the empty graph.
    pub fn avg_degree(&self) -> f64 {
        if self.adj.is_empty() {
            0.0
        } else {
            2.0 * self.m as f64 / self.adj.len() as f64
        }
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Sum of squared degrees, the variance proxy of the degree estimator.
    pub fn degree_square_sum(&self) -> f64 {
        self.adj.iter().map(|l| (l.len() * l.len()) as f64).sum()
    }

    /// Canonical edge list with `u < v`.
    pub fn edge_list(&self) -> Vec<(u32, u32)> {
        let mut edges = Vec::with_capacity(self.m as usize);
        for (u, list) in self.adj.iter().enumerate() {
            for &v in list {
                if (u as u32) < v {
                    edges.push((u as u32, v));
                }
            }
        }
        edges
    }

    /// Copy with one edge removed. The edge must exist.
    pub fn with_edge_removed(&self, u: u32, v: u32) -> Result<Graph> {
        let key = (u.min(v), u.max(v));
        let edges: Vec<(u32, u32)> = self
            .edge_list()
            .into_iter()
            .filter(|&e| e != key)
            .collect();
        if edges.len() as u64 == self.m {
            return Err(Error::InvalidParameter(format!(
                "edge ({u}, {v}) is not present"
            )));
        }
        Graph::from_edges(self.n(), &edges)
    }

    /// Copy with one vertex (and its edges) removed; higher vertex ids
    /// shift down by one. Used to form node-neighboring inputs.
    pub fn with_vertex_removed(&self, v: u32) -> Result<Graph> {
        if v as usize >= self.n() {
            return Err(Error::InvalidParameter(format!(
                "vertex {v} outside 0..{}",
                self.n()
            )));
        }
        let shift = |w: u32| if w > v { w - 1 } else { w };
        let edges: Vec<(u32, u32)> = self
            .edge_list()
            .into_iter()
            .filter(|&(a, b)| a != v && b != v)
            .map(|(a, b)| (shift(a), shift(b)))
            .collect();
        Graph::from_edges(self.n() - 1, &edges)
    }
}
