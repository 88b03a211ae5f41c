//! Approximated concentration: Gaussian random projections diffused over the
//! row-normalized training adjacency, compared by cosine or dot product.

mod embedding;

use std::fmt;
use std::str::FromStr;

use ndarray::ArrayView1;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{
    EdgeSplit, NodeId, NormalizationMode, NormalizedAdjacency, SparseMatrix, SplitType,
};
use crate::{Error, Result, Scalar};

/// Neighbor rows requested ahead of use in gathers.
const AHEAD: usize = 2;

pub use embedding::{
    init_embeddings, read_embedding_binary, EmbeddingKind, EmbeddingMatrix, Variance,
};

/// Default diffusion coefficients `α_k = β^(k-1)`.
pub fn default_alpha(k: usize, beta: f64) -> Vec<f64> {
    (0..k).map(|i| beta.powi(i as i32)).collect()
}

/// `N = Σ_k α_k Ã^k R` over a row-normalized adjacency, by repeated sparse
/// products.
pub fn diffuse<T: Scalar>(
    adj: &NormalizedAdjacency<T>,
    raw: &EmbeddingMatrix<T>,
    alpha: &[f64],
) -> Result<EmbeddingMatrix<T>> {
    if adj.mode != NormalizationMode::Row {
        return Err(Error::InvalidParameter(
            "diffusion expects a row-normalized adjacency".into(),
        ));
    }
    diffuse_with(&adj.matrix, raw, alpha)
}

/// [`diffuse`] over an arbitrary (e.g. reweighted) sparse operator.
pub fn diffuse_with<T: Scalar>(
    operator: &SparseMatrix<T>,
    raw: &EmbeddingMatrix<T>,
    alpha: &[f64],
) -> Result<EmbeddingMatrix<T>> {
    if alpha.is_empty() {
        return Err(Error::InvalidParameter(
            "need at least one diffusion step".into(),
        ));
    }
    if alpha.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
        return Err(Error::InvalidParameter(
            "diffusion coefficients must be non-negative".into(),
        ));
    }
    let mut acc = ndarray::Array2::<T>::zeros(raw.values.raw_dim());
    let mut power = ndarray::Array2::<T>::zeros(raw.values.raw_dim());
    let mut next = ndarray::Array2::<T>::zeros(raw.values.raw_dim());
    for (step, &a) in alpha.iter().enumerate() {
        if step == 0 {
            operator.mul_dense_into(raw.values.view(), &mut power)?;
        } else {
            operator.mul_dense_into(power.view(), &mut next)?;
            std::mem::swap(&mut power, &mut next);
        }
        let a = T::from_f64_lossy(a);
        acc.zip_mut_with(&power, |o, &p| *o += a * p);
    }
    Ok(EmbeddingMatrix {
        values: acc,
        seed: raw.seed,
        kind: EmbeddingKind::Diffused {
            hops: alpha.len(),
            alpha: alpha.to_vec(),
        },
    })
}

/// Pairwise embedding similarity `φ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Similarity {
    #[default]
    Cosine,
    Dot,
}

impl Similarity {
    /// Cosine against a zero vector is 0.
    pub fn eval<T: Scalar>(self, a: ArrayView1<'_, T>, b: ArrayView1<'_, T>) -> T {
        match self {
            Similarity::Dot => dot(a, b),
            Similarity::Cosine => cosine_from(dot(a, b), dot(a, a), dot(b, b)),
        }
    }
}

/// Cosine from a dot product and two squared norms.
fn cosine_from<T: Scalar>(dot: T, na: T, nb: T) -> T {
    if na == T::zero() || nb == T::zero() {
        T::zero()
    } else {
        let c = dot / (na.sqrt() * nb.sqrt());
        c.max(-T::one()).min(T::one())
    }
}

pub(crate) fn dot<T: Scalar>(a: ArrayView1<'_, T>, b: ArrayView1<'_, T>) -> T {
    match (a.as_slice(), b.as_slice()) {
        (Some(a), Some(b)) => a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y),
        _ => a
            .iter()
            .zip(b.iter())
            .fold(T::zero(), |acc, (&x, &y)| acc + x * y),
    }
}

impl fmt::Display for Similarity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Similarity::Cosine => "cosine",
            Similarity::Dot => "dot",
        })
    }
}

impl FromStr for Similarity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cosine" => Ok(Similarity::Cosine),
            "dot" => Ok(Similarity::Dot),
            _ => Err(Error::InvalidParameter(format!("unknown similarity {s:?}"))),
        }
    }
}

/// Mean similarity between a node's diffused embedding and those of its
/// type-`t` neighbors; `None` without such neighbors.
pub fn atc<T: Scalar>(
    diffused: &EmbeddingMatrix<T>,
    split: &EdgeSplit,
    node: NodeId,
    split_type: SplitType,
    phi: Similarity,
) -> Result<Option<T>> {
    if diffused.rows() != split.node_count() {
        return Err(Error::InvalidParameter(format!(
            "embedding has {} rows for {} nodes",
            diffused.rows(),
            split.node_count()
        )));
    }
    if node >= split.node_count() {
        return Err(Error::NotFound(format!("node {node}")));
    }
    let sq = |j: NodeId| dot(diffused.row(j), diffused.row(j));
    Ok(atc_unchecked(diffused, split, node, split_type, phi, sq))
}

/// `sq(j)` is the squared norm of row `j`, used only for cosine.
fn atc_unchecked<T: Scalar>(
    diffused: &EmbeddingMatrix<T>,
    split: &EdgeSplit,
    node: NodeId,
    split_type: SplitType,
    phi: Similarity,
    sq: impl Fn(NodeId) -> T,
) -> Option<T> {
    let neighbors = split.neighbors(node, split_type);
    if neighbors.is_empty() {
        return None;
    }
    let own = diffused.row(node);
    let values = diffused.values.as_slice();
    let d = diffused.values.ncols();
    let fetch = |j: NodeId| {
        if let Some(all) = values {
            crate::prefetch::row(&all[j * d..(j + 1) * d]);
        }
    };
    neighbors.iter().take(AHEAD).for_each(|&j| fetch(j));
    let ahead = |idx: usize| {
        if let Some(&j) = neighbors.get(idx + AHEAD) {
            fetch(j);
        }
    };
    let sum = match phi {
        Similarity::Dot => neighbors
            .iter()
            .enumerate()
            .fold(T::zero(), |acc, (idx, &j)| {
                ahead(idx);
                acc + dot(own, diffused.row(j))
            }),
        Similarity::Cosine => {
            let own_sq = sq(node);
            neighbors
                .iter()
                .enumerate()
                .fold(T::zero(), |acc, (idx, &j)| {
                    ahead(idx);
                    acc + cosine_from(dot(own, diffused.row(j)), own_sq, sq(j))
                })
        }
    };
    Some(sum / T::from_count(neighbors.len()))
}

pub fn atc_all<T: Scalar>(
    diffused: &EmbeddingMatrix<T>,
    split: &EdgeSplit,
    split_type: SplitType,
    phi: Similarity,
) -> Result<Vec<Option<T>>> {
    if diffused.rows() != split.node_count() {
        return Err(Error::InvalidParameter(format!(
            "embedding has {} rows for {} nodes",
            diffused.rows(),
            split.node_count()
        )));
    }
    let squares: Vec<T> = match phi {
        Similarity::Cosine => (0..diffused.rows())
            .into_par_iter()
            .map(|j| dot(diffused.row(j), diffused.row(j)))
            .collect(),
        Similarity::Dot => Vec::new(),
    };
    Ok((0..split.node_count())
        .into_par_iter()
        .map(|i| atc_unchecked(diffused, split, i, split_type, phi, |j| squares[j]))
        .collect())
}
