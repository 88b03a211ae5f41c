use ndarray::Array1;

use crate::atc::EmbeddingMatrix;
use crate::graph::NodeId;
use crate::Scalar;

/// Training-free link scorer: `score(i, j) = N_i · N_j` over diffused
/// embeddings.
#[derive(Debug, Clone, Copy)]
pub struct DiffusionPredictor<'a, T> {
    embeddings: &'a EmbeddingMatrix<T>,
}

pub fn diffusion_predictor<T: Scalar>(diffused: &EmbeddingMatrix<T>) -> DiffusionPredictor<'_, T> {
    DiffusionPredictor {
        embeddings: diffused,
    }
}

impl<T: Scalar> DiffusionPredictor<'_, T> {
    pub fn score(&self, i: NodeId, j: NodeId) -> T {
        crate::atc::dot(self.embeddings.row(i), self.embeddings.row(j))
    }

    /// Scores of `i` against every node.
    pub fn score_row(&self, i: NodeId) -> Vec<T> {
        let own = self.embeddings.row(i);
        let row: Array1<T> = self.embeddings.values.dot(&own);
        row.to_vec()
    }
}
