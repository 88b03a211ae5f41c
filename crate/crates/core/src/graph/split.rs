use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Csr, Edge, Graph, NodeId};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SplitType {
    Train,
    Val,
    Test,
}

impl SplitType {
    pub const ALL: [SplitType; 3] = [SplitType::Train, SplitType::Val, SplitType::Test];

    pub fn short_name(self) -> &'static str {
        match self {
            SplitType::Train => "Tr",
            SplitType::Val => "Val",
            SplitType::Test => "Te",
        }
    }
}

impl fmt::Display for SplitType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for SplitType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tr" | "train" => Ok(SplitType::Train),
            "val" | "valid" | "validation" => Ok(SplitType::Val),
            "te" | "test" => Ok(SplitType::Test),
            _ => Err(Error::InvalidParameter(format!("unknown split type {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitRatios {
    pub fn new(train: f64, val: f64, test: f64) -> Result<Self> {
        let r = Self { train, val, test };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|x| !x.is_finite() || *x < 0.0) {
            return Err(Error::InvalidRatio(format!(
                "ratios must be non-negative, got {parts:?}"
            )));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidRatio(format!(
                "ratios sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }

    /// `(train, val, test)` counts for `m` edges; remainder goes to train.
    pub fn counts(&self, m: usize) -> (usize, usize, usize) {
        let floor = |r: f64| ((m as f64) * r + 1e-9).floor() as usize;
        let val = floor(self.val).min(m);
        let test = floor(self.test).min(m - val);
        (m - val - test, val, test)
    }
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.7,
            val: 0.1,
            test: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitStrategy {
    Random { seed: u64 },
    Temporal,
}

/// Disjoint train/validation/test partition of a graph's edges.
///
/// Neighbor lists per split type are kept in compressed row form over the
/// full node range, so nodes absent from a split simply have empty rows.
#[derive(Debug, Clone)]
pub struct EdgeSplit {
    node_count: usize,
    edges: [Vec<Edge>; 3],
    adjacency: [Csr; 3],
}

impl EdgeSplit {
    /// Assembles a split from explicit edge lists. Fails when an edge appears
    /// in more than one part or is out of range.
    pub fn from_parts(
        node_count: usize,
        train: Vec<Edge>,
        val: Vec<Edge>,
        test: Vec<Edge>,
    ) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for e in train.iter().chain(&val).chain(&test) {
            if e.u >= node_count || e.v >= node_count || e.u == e.v {
                return Err(Error::InvalidParameter(format!(
                    "edge ({}, {}) invalid for {node_count} nodes",
                    e.u, e.v
                )));
            }
            if !seen.insert(e.key()) {
                return Err(Error::InvalidParameter(format!(
                    "edge ({}, {}) appears twice",
                    e.u, e.v
                )));
            }
        }
        let adjacency = [&train, &val, &test]
            .map(|part| Csr::from_edges(node_count, part.iter().map(Edge::key)));
        Ok(Self {
            node_count,
            edges: [train, val, test],
            adjacency,
        })
    }

    /// Every edge of `g` in train; validation and test empty.
    pub fn all_train(g: &Graph) -> Self {
        Self::from_parts(g.node_count(), g.edges().to_vec(), Vec::new(), Vec::new())
            .expect("graph edges are distinct")
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edges(&self, t: SplitType) -> &[Edge] {
        &self.edges[t as usize]
    }

    pub fn adjacency(&self, t: SplitType) -> &Csr {
        &self.adjacency[t as usize]
    }

    pub fn train(&self) -> &Csr {
        self.adjacency(SplitType::Train)
    }

    pub fn neighbors(&self, node: NodeId, t: SplitType) -> &[NodeId] {
        self.adjacency[t as usize].row(node)
    }

    pub fn train_degree(&self, node: NodeId) -> usize {
        self.adjacency[0].degree(node)
    }

    /// The same split with validation and test exchanged.
    pub fn swap_val_test(&self) -> Self {
        let [train, val, test] = self.edges.clone();
        Self::from_parts(self.node_count, train, test, val).expect("parts already disjoint")
    }
}

pub fn split_edges(g: &Graph, ratios: SplitRatios, strategy: SplitStrategy) -> Result<EdgeSplit> {
    ratios.validate()?;
    let mut edges = g.edges().to_vec();
    match strategy {
        SplitStrategy::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            edges.shuffle(&mut rng);
        }
        SplitStrategy::Temporal => {
            let missing = edges.iter().filter(|e| e.timestamp.is_none()).count();
            if missing > 0 {
                return Err(Error::MissingTimestamp { missing });
            }
            edges.sort_by_key(|e| e.timestamp);
        }
    }
    let (n_train, n_val, _) = ratios.counts(edges.len());
    let test = edges.split_off(n_train + n_val);
    let val = edges.split_off(n_train);
    EdgeSplit::from_parts(g.node_count(), edges, val, test)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn path_graph(m: usize) -> Graph {
        Graph::from_edges(m + 1, (0..m).map(|i| (i, i + 1)))
    }

    #[test]
    fn seventy_ten_twenty() {
        let g = path_graph(100);
        let s = split_edges(
            &g,
            SplitRatios::default(),
            SplitStrategy::Random { seed: 1 },
        )
        .unwrap();
        assert_eq!(s.edges(SplitType::Train).len(), 70);
        assert_eq!(s.edges(SplitType::Val).len(), 10);
        assert_eq!(s.edges(SplitType::Test).len(), 20);
    }

    #[test]
    fn degenerate_ratio() {
        let g = path_graph(17);
        let s = split_edges(
            &g,
            SplitRatios::new(1.0, 0.0, 0.0).unwrap(),
            SplitStrategy::Random { seed: 3 },
        )
        .unwrap();
        assert_eq!(s.edges(SplitType::Train).len(), 17);
        assert!(s.edges(SplitType::Val).is_empty());
        assert!(s.edges(SplitType::Test).is_empty());
    }

    #[test]
    fn remainder_goes_to_train() {
        let r = SplitRatios::default();
        assert_eq!(r.counts(7), (6, 0, 1));
        assert_eq!(r.counts(33), (24, 3, 6));
    }

    #[test]
    fn temporal_latest_edges_are_test() {
        let labels: Vec<String> = (0..11).map(|i| i.to_string()).collect();
        // timestamps deliberately not in id order
        let stamps = [50, 10, 90, 30, 70, 20, 100, 40, 60, 80];
        let edges = (0..10).map(|i| Edge::new(i, i + 1, Some(stamps[i])));
        let (g, _, _) = Graph::with_labels(labels, edges);
        let s = split_edges(&g, SplitRatios::default(), SplitStrategy::Temporal).unwrap();
        // sort-and-slice oracle
        let mut by_time = g.edges().to_vec();
        by_time.sort_by_key(|e| e.timestamp);
        let expected: HashSet<_> = by_time[8..].iter().map(Edge::key).collect();
        let got: HashSet<_> = s.edges(SplitType::Test).iter().map(Edge::key).collect();
        assert_eq!(got, expected);
        let mut test_times: Vec<_> = s
            .edges(SplitType::Test)
            .iter()
            .map(|e| e.timestamp.unwrap())
            .collect();
        test_times.sort();
        assert_eq!(test_times, vec![90, 100]);
    }

    #[test]
    fn temporal_requires_timestamps() {
        let g = path_graph(5);
        assert!(matches!(
            split_edges(&g, SplitRatios::default(), SplitStrategy::Temporal),
            Err(Error::MissingTimestamp { missing: 5 })
        ));
    }

    #[test]
    fn invalid_ratios() {
        assert!(matches!(
            SplitRatios::new(1.2, -0.2, 0.0),
            Err(Error::InvalidRatio(_))
        ));
        assert!(matches!(
            SplitRatios::new(0.5, 0.1, 0.1),
            Err(Error::InvalidRatio(_))
        ));
    }

    #[test]
    fn neighbor_lists_follow_split_edges() {
        let g = Graph::from_edges(6, [(0, 1), (0, 2), (0, 3), (1, 2), (3, 4), (4, 5), (2, 5)]);
        let s = split_edges(
            &g,
            SplitRatios::new(0.5, 0.25, 0.25).unwrap(),
            SplitStrategy::Random { seed: 9 },
        )
        .unwrap();
        for t in SplitType::ALL {
            for node in 0..6 {
                let mut expected: Vec<_> = s
                    .edges(t)
                    .iter()
                    .filter_map(|e| match node {
                        x if x == e.u => Some(e.v),
                        x if x == e.v => Some(e.u),
                        _ => None,
                    })
                    .collect();
                expected.sort();
                assert_eq!(s.neighbors(node, t), expected.as_slice());
            }
        }
    }
}
