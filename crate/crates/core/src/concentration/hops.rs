use rayon::prelude::*;

use crate::graph::{Csr, EdgeSplit, NodeId};
use crate::{Error, Result};

/// `sets[k - 1]` is the sorted hop set `H^k` of `owner`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopSets {
    pub owner: NodeId,
    pub sets: Vec<Vec<NodeId>>,
}

impl HopSets {
    pub fn hops(&self) -> usize {
        self.sets.len()
    }

    pub fn get(&self, k: usize) -> &[NodeId] {
        &self.sets[k - 1]
    }
}

/// Reusable frontier-expansion scratch for one adjacency.
pub struct HopExpander<'a> {
    adjacency: &'a Csr,
    stamp: Vec<u32>,
    epoch: u32,
}

impl<'a> HopExpander<'a> {
    pub fn new(adjacency: &'a Csr) -> Self {
        Self {
            adjacency,
            stamp: vec![0; adjacency.node_count()],
            epoch: 0,
        }
    }

    fn next_epoch(&mut self) -> u32 {
        if self.epoch == u32::MAX {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 0;
        }
        self.epoch += 1;
        self.epoch
    }

    /// Walk-reachable sets for hops `1..=k`.
    ///
    /// The walk frontier keeps the owner (walks may pass through it); the
    /// owner is only removed from the reported sets.
    pub fn expand(&mut self, owner: NodeId, k: usize) -> HopSets {
        let mut frontier = vec![owner];
        let mut sets = Vec::with_capacity(k);
        for _ in 0..k {
            let epoch = self.next_epoch();
            let mut next = Vec::new();
            for &u in &frontier {
                for &v in self.adjacency.row(u) {
                    if self.stamp[v] != epoch {
                        self.stamp[v] = epoch;
                        next.push(v);
                    }
                }
            }
            next.sort_unstable();
            let hop: Vec<NodeId> = next.iter().copied().filter(|&v| v != owner).collect();
            sets.push(hop);
            frontier = next;
        }
        HopSets { owner, sets }
    }
}

pub fn hop_sets(split: &EdgeSplit, node: NodeId, k: usize) -> Result<HopSets> {
    if k == 0 {
        return Err(Error::InvalidParameter("hop count must be positive".into()));
    }
    if node >= split.node_count() {
        return Err(Error::NotFound(format!("node {node}")));
    }
    Ok(HopExpander::new(split.train()).expand(node, k))
}

/// Hop sets of every node, built in parallel.
#[derive(Debug, Clone)]
pub struct HopIndex {
    k: usize,
    sets: Vec<HopSets>,
}

impl HopIndex {
    pub fn build(split: &EdgeSplit, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("hop count must be positive".into()));
        }
        let train = split.train();
        let sets = (0..split.node_count())
            .into_par_iter()
            .map_init(|| HopExpander::new(train), |ex, i| ex.expand(i, k))
            .collect();
        Ok(Self { k, sets })
    }

    pub fn hops(&self) -> usize {
        self.k
    }

    pub fn node_count(&self) -> usize {
        self.sets.len()
    }

    pub fn get(&self, node: NodeId) -> &HopSets {
        &self.sets[node]
    }
}
