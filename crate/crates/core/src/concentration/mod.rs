//! Exact topological concentration over k-hop walk sets.
//!
//! For a node `i` and hop `k`, `H_i^k` holds every node other than `i` that
//! is the endpoint of at least one length-`k` walk from `i` over training
//! edges. Concentration averages, over the type-`t` neighbors `j` of `i`, the
//! β-discounted overlap between `{H_i^k}` and `{H_j^k}` normalized by `g`.

mod density;
mod hops;
mod tc;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::graph::{NodeId, SplitType};
use crate::{Error, Result};

pub use density::subgraph_density;
pub use hops::{hop_sets, HopExpander, HopIndex, HopSets};
pub use tc::{tc, tc_all, tc_all_with_index, weighted_tc};

/// `|N_i ∩ N_j|` over training edges.
pub fn common_neighbor_count(split: &crate::graph::EdgeSplit, i: NodeId, j: NodeId) -> usize {
    tc::common_count(split.train().row(i), split.train().row(j))
}

/// Normalization `g(|H_i^k1|, |H_j^k2|)` of one hop-pair term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormMode {
    /// `|H_i| * |H_j|`
    #[default]
    Product,
    /// `|H_i|`
    Source,
    /// `min(|H_i|, |H_j|)`
    Min,
}

impl NormMode {
    pub(crate) fn eval(self, source: usize, target: usize) -> usize {
        match self {
            NormMode::Product => source * target,
            NormMode::Source => source,
            NormMode::Min => source.min(target),
        }
    }
}

impl fmt::Display for NormMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormMode::Product => "product",
            NormMode::Source => "source",
            NormMode::Min => "min",
        })
    }
}

impl FromStr for NormMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "product" => Ok(NormMode::Product),
            "source" => Ok(NormMode::Source),
            "min" => Ok(NormMode::Min),
            _ => Err(Error::InvalidParameter(format!("unknown norm {s:?}"))),
        }
    }
}

/// Hop count, discount and normalization for one concentration query.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcParams {
    pub k: usize,
    pub beta: f64,
    pub norm: NormMode,
}

impl TcParams {
    /// Largest supported hop count; hop membership is tracked in a 64-bit mask.
    pub const MAX_HOPS: usize = 64;

    pub fn new(k: usize, beta: f64, norm: NormMode) -> Result<Self> {
        let p = Self { k, beta, norm };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > Self::MAX_HOPS {
            return Err(Error::InvalidParameter(format!(
                "hop count must be in 1..={}, got {}",
                Self::MAX_HOPS,
                self.k
            )));
        }
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "beta must be in (0, 1], got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

impl Default for TcParams {
    fn default() -> Self {
        Self {
            k: 1,
            beta: 0.5,
            norm: NormMode::Product,
        }
    }
}

/// Concentration of one node; `value` is `None` when the node has no
/// neighbors of the requested split type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TcResult<T> {
    pub node: NodeId,
    pub split_type: SplitType,
    pub k: usize,
    pub beta: f64,
    pub norm: NormMode,
    pub value: Option<T>,
}
