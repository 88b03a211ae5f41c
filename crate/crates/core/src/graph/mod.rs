//! Immutable undirected graph substrate: loading, splitting and normalization.

mod csr;
mod generators;
mod io;
mod normalize;
mod split;

use std::collections::HashMap;

pub use csr::Csr;
pub use generators::{erdos_renyi, gnm, stochastic_block_model};
pub use io::{load_edge_list, read_label_map, LoadReport, LoadedGraph};
pub use normalize::{normalize, NormalizationMode, NormalizedAdjacency, SparseMatrix};
pub use split::{split_edges, EdgeSplit, SplitRatios, SplitStrategy, SplitType};

/// Dense node index in `0..n`.
pub type NodeId = usize;

/// Undirected edge stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub u: NodeId,
    pub v: NodeId,
    pub timestamp: Option<i64>,
}

impl Edge {
    pub fn new(a: NodeId, b: NodeId, timestamp: Option<i64>) -> Self {
        let (u, v) = if a <= b { (a, b) } else { (b, a) };
        Self { u, v, timestamp }
    }

    pub fn key(&self) -> (NodeId, NodeId) {
        (self.u, self.v)
    }
}

/// Symmetric, simple graph in compressed row layout.
///
/// Node labels are the original string identifiers; `labels[id]` recovers the
/// label of a dense id.
#[derive(Debug, Clone)]
pub struct Graph {
    adjacency: Csr,
    edges: Vec<Edge>,
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl Graph {
    /// Builds a graph over `n` nodes labelled `"0".."n-1"`.
    ///
    /// Self-loops and duplicate pairs are dropped; the first timestamp seen
    /// for a pair is replaced by any earlier one.
    pub fn from_edges<I>(n: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let labels = (0..n).map(|i| i.to_string()).collect();
        let edges = edges.into_iter().map(|(a, b)| Edge::new(a, b, None));
        Self::with_labels(labels, edges).0
    }

    /// Builds a graph from dense-id edges and an explicit label vector.
    ///
    /// Returns the graph plus `(duplicates, self_loops)` dropped.
    pub fn with_labels<I>(labels: Vec<String>, edges: I) -> (Self, usize, usize)
    where
        I: IntoIterator<Item = Edge>,
    {
        let n = labels.len();
        let mut self_loops = 0;
        let mut raw: Vec<Edge> = Vec::new();
        for e in edges {
            assert!(
                e.u < n && e.v < n,
                "edge ({}, {}) out of range for n={n}",
                e.u,
                e.v
            );
            if e.u == e.v {
                self_loops += 1;
                continue;
            }
            raw.push(Edge::new(e.u, e.v, e.timestamp));
        }
        let total = raw.len();
        raw.sort_by(|a, b| {
            a.key()
                .cmp(&b.key())
                .then(cmp_timestamp(a.timestamp, b.timestamp))
        });
        raw.dedup_by(|next, kept| next.key() == kept.key());
        let duplicates = total - raw.len();

        let adjacency = Csr::from_edges(n, raw.iter().map(Edge::key));
        let index = labels
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, l)| (l, i))
            .collect();
        let graph = Self {
            adjacency,
            edges: raw,
            labels,
            index,
        };
        (graph, duplicates, self_loops)
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        self.adjacency.row(node)
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency.degree(node)
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.node_count()).map(|i| self.degree(i)).collect()
    }

    pub fn adjacency(&self) -> &Csr {
        &self.adjacency
    }

    /// Canonical edges sorted by `(u, v)`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, node: NodeId) -> &str {
        &self.labels[node]
    }

    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    /// True when every edge carries a timestamp.
    pub fn has_timestamps(&self) -> bool {
        self.edges.iter().all(|e| e.timestamp.is_some())
    }
}

// Missing timestamps sort after present ones so the earliest known time wins on dedup.
fn cmp_timestamp(a: Option<i64>, b: Option<i64>) -> std::cmp::Ordering {
    match (a, b) {
        (Some(x), Some(y)) => x.cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    }
}
