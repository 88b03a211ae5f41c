use rayon::prelude::*;

use super::{HopExpander, HopIndex, HopSets, TcParams, TcResult};
use crate::graph::{EdgeSplit, NodeId, SplitType};
use crate::{Error, Result, Scalar};

/// Scratch for one concentration evaluation: a per-node bitmask of the hops
/// at which the node belongs to the owner's hop sets.
struct Membership {
    mask: Vec<u64>,
    counts: Vec<usize>,
}

impl Membership {
    fn new(n: usize, k: usize) -> Self {
        Self {
            mask: vec![0; n],
            counts: vec![0; k * k],
        }
    }

    fn mark(&mut self, owner: &HopSets) {
        for (k, set) in owner.sets.iter().enumerate() {
            for &v in set {
                self.mask[v] |= 1 << k;
            }
        }
    }

    fn clear(&mut self, owner: &HopSets) {
        for set in &owner.sets {
            for &v in set {
                self.mask[v] = 0;
            }
        }
    }

    /// `counts[k1 * K + k2] = |H_i^k1 ∩ H_j^k2|` for the marked owner `i`.
    fn intersect(&mut self, other: &HopSets) -> &[usize] {
        let k = other.hops();
        self.counts.iter_mut().for_each(|c| *c = 0);
        for (k2, set) in other.sets.iter().enumerate() {
            for &v in set {
                let mut bits = self.mask[v];
                while bits != 0 {
                    let k1 = bits.trailing_zeros() as usize;
                    self.counts[k1 * k + k2] += 1;
                    bits &= bits - 1;
                }
            }
        }
        &self.counts
    }
}

/// Shared per-node kernel; `tc` and `tc_all` both go through here so their
/// results are bit-identical.
fn concentration_of<'h, T: Scalar>(
    owner: &HopSets,
    neighbors: &[NodeId],
    hop_sets_of: impl Fn(NodeId) -> &'h HopSets,
    params: &TcParams,
    scratch: &mut Membership,
) -> Option<T> {
    if neighbors.is_empty() {
        return None;
    }
    let k = params.k;
    let beta = T::from_f64_lossy(params.beta);
    let discount: Vec<T> = (0..2 * k - 1).map(|s| beta.powi(s as i32)).collect();

    scratch.mark(owner);
    let mut total = T::zero();
    let mut counted = 0usize;
    for &j in neighbors {
        let other = hop_sets_of(j);
        let counts = scratch.intersect(other);
        let mut numerator = T::zero();
        let mut denominator = T::zero();
        for k1 in 0..k {
            let size_i = owner.sets[k1].len();
            for k2 in 0..k {
                let g = params.norm.eval(size_i, other.sets[k2].len());
                if g == 0 {
                    continue;
                }
                let w = discount[k1 + k2];
                numerator += w * T::from_count(counts[k1 * k + k2]);
                denominator += w * T::from_count(g);
            }
        }
        if denominator > T::zero() {
            total += numerator / denominator;
            counted += 1;
        }
    }
    scratch.clear(owner);

    if counted == 0 {
        // neighbors exist but none shares a non-empty computation tree
        Some(T::zero())
    } else {
        Some(total / T::from_count(counted))
    }
}

fn result<T>(
    node: NodeId,
    split_type: SplitType,
    params: &TcParams,
    value: Option<T>,
) -> TcResult<T> {
    TcResult {
        node,
        split_type,
        k: params.k,
        beta: params.beta,
        norm: params.norm,
        value,
    }
}

/// Concentration of a single node.
pub fn tc<T: Scalar>(
    split: &EdgeSplit,
    node: NodeId,
    split_type: SplitType,
    params: TcParams,
) -> Result<TcResult<T>> {
    params.validate()?;
    let n = split.node_count();
    if node >= n {
        return Err(Error::NotFound(format!("node {node}")));
    }
    let neighbors = split.neighbors(node, split_type);
    let mut expander = HopExpander::new(split.train());
    let owner = expander.expand(node, params.k);
    let others: Vec<HopSets> = neighbors
        .iter()
        .map(|&j| expander.expand(j, params.k))
        .collect();
    let mut scratch = Membership::new(n, params.k);
    let value = concentration_of(
        &owner,
        neighbors,
        |j| {
            let pos = neighbors
                .binary_search(&j)
                .expect("neighbor list is sorted");
            &others[pos]
        },
        &params,
        &mut scratch,
    );
    Ok(result(node, split_type, &params, value))
}

/// Concentration of every node, fanned out across the rayon pool.
pub fn tc_all<T: Scalar>(
    split: &EdgeSplit,
    split_type: SplitType,
    params: TcParams,
) -> Result<Vec<TcResult<T>>> {
    params.validate()?;
    let index = HopIndex::build(split, params.k)?;
    tc_all_with_index(split, &index, split_type, params)
}

/// As [`tc_all`], reusing prebuilt hop sets (e.g. across split types).
pub fn tc_all_with_index<T: Scalar>(
    split: &EdgeSplit,
    index: &HopIndex,
    split_type: SplitType,
    params: TcParams,
) -> Result<Vec<TcResult<T>>> {
    params.validate()?;
    if index.hops() != params.k || index.node_count() != split.node_count() {
        return Err(Error::InvalidParameter(format!(
            "hop index built for k={} over {} nodes, query needs k={} over {}",
            index.hops(),
            index.node_count(),
            params.k,
            split.node_count()
        )));
    }
    let n = split.node_count();
    Ok((0..n)
        .into_par_iter()
        .map_init(
            || Membership::new(n, params.k),
            |scratch, i| {
                let value = concentration_of(
                    index.get(i),
                    split.neighbors(i, split_type),
                    |j| index.get(j),
                    &params,
                    scratch,
                );
                result(i, split_type, &params, value)
            },
        )
        .collect())
}

/// One-hop concentration with training neighbors weighted by `scores`
/// (aligned with the node's sorted training neighbors) and source
/// normalization: `Σ_j s_j |H_i ∩ H_j| / |H_i|`.
///
/// Returns `Ok(None)` for a node without training neighbors.
pub fn weighted_tc<T: Scalar>(split: &EdgeSplit, node: NodeId, scores: &[T]) -> Result<Option<T>> {
    if node >= split.node_count() {
        return Err(Error::NotFound(format!("node {node}")));
    }
    let train = split.train();
    let neighbors = train.row(node);
    if neighbors.is_empty() {
        return Ok(None);
    }
    if scores.len() != neighbors.len() {
        return Err(Error::InvalidWeights(format!(
            "{} scores for {} training neighbors",
            scores.len(),
            neighbors.len()
        )));
    }
    if scores.iter().any(|s| !(s.is_finite() && *s >= T::zero())) {
        return Err(Error::InvalidWeights(
            "scores must be finite and non-negative".into(),
        ));
    }
    let sum: f64 = scores.iter().map(|s| s.as_f64()).sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidWeights(format!(
            "scores sum to {sum}, expected 1"
        )));
    }
    let mut acc = T::zero();
    for (&j, &s) in neighbors.iter().zip(scores) {
        acc += s * T::from_count(common_count(neighbors, train.row(j)));
    }
    Ok(Some(acc / T::from_count(neighbors.len())))
}

pub(crate) fn common_count(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}
