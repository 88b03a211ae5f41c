use super::tc::common_count;
use crate::graph::{EdgeSplit, NodeId};
use crate::{Error, Result, Scalar};

/// Edge density of the closed one-hop training neighborhood of `node`:
/// edges among `{node} ∪ N(node)` over `C(|N| + 1, 2)`. Isolated nodes give 0.
pub fn subgraph_density<T: Scalar>(split: &EdgeSplit, node: NodeId) -> Result<T> {
    if node >= split.node_count() {
        return Err(Error::NotFound(format!("node {node}")));
    }
    let train = split.train();
    let neighbors = train.row(node);
    let d = neighbors.len();
    if d == 0 {
        return Ok(T::zero());
    }
    // every neighbor-neighbor edge is seen from both endpoints
    let among: usize = neighbors
        .iter()
        .map(|&u| common_count(neighbors, train.row(u)))
        .sum::<usize>()
        / 2;
    let pairs = (d + 1) * d / 2;
    Ok(T::from_count(d + among) / T::from_count(pairs))
}
