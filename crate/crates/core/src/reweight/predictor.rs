use ndarray::ArrayView1;

use crate::concentration::common_neighbor_count;
use crate::graph::{EdgeSplit, NodeId};
use crate::Scalar;

/// Pair scorer `g(N_i, H_j)` used inside the reweighting softmax.
///
/// `neighborhood` is node `i`'s averaged neighborhood embedding and
/// `embedding` is node `j`'s own embedding; implementations may also use the
/// ids directly.
pub trait LinkPredictor<T: Scalar>: Sync {
    fn score(
        &self,
        i: NodeId,
        j: NodeId,
        neighborhood: ArrayView1<'_, T>,
        embedding: ArrayView1<'_, T>,
    ) -> T;
}

/// Dot product of the two embeddings.
#[derive(Debug, Clone, Copy, Default)]
pub struct DotProduct;

impl<T: Scalar> LinkPredictor<T> for DotProduct {
    fn score(
        &self,
        _: NodeId,
        _: NodeId,
        neighborhood: ArrayView1<'_, T>,
        embedding: ArrayView1<'_, T>,
    ) -> T {
        crate::atc::dot(neighborhood, embedding)
    }
}

/// Number of common training neighbors, ignoring embeddings. Its scores are
/// monotone in the one-hop overlap by construction.
#[derive(Debug, Clone, Copy)]
pub struct CommonNeighbors<'a> {
    pub split: &'a EdgeSplit,
    pub scale: f64,
}

impl<'a> CommonNeighbors<'a> {
    pub fn new(split: &'a EdgeSplit) -> Self {
        Self { split, scale: 1.0 }
    }
}

impl<T: Scalar> LinkPredictor<T> for CommonNeighbors<'_> {
    fn score(&self, i: NodeId, j: NodeId, _: ArrayView1<'_, T>, _: ArrayView1<'_, T>) -> T {
        T::from_f64_lossy(self.scale * common_neighbor_count(self.split, i, j) as f64)
    }
}
