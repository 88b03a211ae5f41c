//! Topological concentration analytics for link prediction.
//!
//! The numeric modules are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases at the crate root fix the common `f64` instantiation.

pub mod analysis;
pub mod atc;
pub mod concentration;
mod error;
pub mod eval;
pub mod graph;
mod prefetch;
pub mod reweight;
mod scalar;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Embeddings = atc::EmbeddingMatrix<f64>;
pub type Embeddings32 = atc::EmbeddingMatrix<f32>;
pub type Adjacency = graph::NormalizedAdjacency<f64>;
pub type Adjacency32 = graph::NormalizedAdjacency<f32>;
pub type Sparse = graph::SparseMatrix<f64>;
pub type Concentration = concentration::TcResult<f64>;
pub type Metrics = eval::NodeMetrics<f64>;
pub type Reweighting = reweight::ReweightState<f64>;
