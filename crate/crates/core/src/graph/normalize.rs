use std::fmt;
use std::str::FromStr;

use ndarray::{Array2, ArrayView2, Axis, Zip};
use rayon::prelude::*;

/// Neighbor rows requested ahead of use in gathers.
const AHEAD: usize = 2;
use serde::{Deserialize, Serialize};

use super::{Csr, EdgeSplit, NodeId};
use crate::{Error, Result, Scalar};

/// Square sparse matrix in CSR layout with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    offsets: Vec<usize>,
    cols: Vec<NodeId>,
    values: Vec<T>,
}

impl<T: Scalar> SparseMatrix<T> {
    /// Matrix with the sparsity pattern of `pattern`, values from `weight(row, col)`.
    pub fn from_pattern(pattern: &Csr, mut weight: impl FnMut(NodeId, NodeId) -> T) -> Self {
        let n = pattern.node_count();
        let mut values = Vec::with_capacity(pattern.nnz());
        for i in 0..n {
            for &j in pattern.row(i) {
                values.push(weight(i, j));
            }
        }
        Self {
            offsets: pattern.offsets().to_vec(),
            cols: pattern.targets().to_vec(),
            values,
        }
    }

    /// Builds from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(NodeId, NodeId, T)]) -> Result<Self> {
        let mut sorted = triplets.to_vec();
        if let Some(&(i, j, _)) = sorted.iter().find(|(i, j, _)| *i >= n || *j >= n) {
            return Err(Error::InvalidParameter(format!(
                "entry ({i}, {j}) out of range for {n}x{n}"
            )));
        }
        sorted.sort_by_key(|a| (a.0, a.1));
        let mut offsets = vec![0usize; n + 1];
        let mut cols = Vec::new();
        let mut values: Vec<T> = Vec::new();
        let mut last: Option<(NodeId, NodeId)> = None;
        for (i, j, v) in sorted {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            last = Some((i, j));
            offsets[i + 1] += 1;
            cols.push(j);
            values.push(v);
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Ok(Self {
            offsets,
            cols,
            values,
        })
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: NodeId) -> (&[NodeId], &[T]) {
        let r = self.offsets[i]..self.offsets[i + 1];
        (&self.cols[r.clone()], &self.values[r])
    }

    pub fn row_values_mut(&mut self, i: NodeId) -> &mut [T] {
        let r = self.offsets[i]..self.offsets[i + 1];
        &mut self.values[r]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn get(&self, i: NodeId, j: NodeId) -> Option<T> {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).ok().map(|k| vals[k])
    }

    /// Position of `(i, j)` in the value array, if stored.
    pub fn position(&self, i: NodeId, j: NodeId) -> Option<usize> {
        let (cols, _) = self.row(i);
        cols.binary_search(&j).ok().map(|k| self.offsets[i] + k)
    }

    pub fn same_pattern(&self, other: &Self) -> bool {
        self.offsets == other.offsets && self.cols == other.cols
    }

    pub fn row_sums(&self) -> Vec<T> {
        (0..self.node_count())
            .map(|i| self.row(i).1.iter().copied().sum())
            .collect()
    }

    /// Scales every nonzero row to sum to one.
    pub fn renormalize_rows(&mut self) {
        for i in 0..self.node_count() {
            let vals = self.row_values_mut(i);
            let s: T = vals.iter().copied().sum();
            if s > T::zero() {
                vals.iter_mut().for_each(|v| *v /= s);
            }
        }
    }

    /// Sparse times dense product, one output row per worker task.
    ///
    /// Each output row is accumulated in column order of the sparse row, so
    /// results do not depend on the number of workers.
    pub fn mul_dense(&self, x: ArrayView2<'_, T>) -> Result<Array2<T>> {
        let mut out = Array2::<T>::zeros((x.nrows(), x.ncols()));
        self.mul_dense_into(x, &mut out)?;
        Ok(out)
    }

    /// `out = self · x`, overwriting `out`.
    pub fn mul_dense_into(&self, x: ArrayView2<'_, T>, out: &mut Array2<T>) -> Result<()> {
        if x.nrows() != self.node_count() || out.dim() != x.dim() {
            return Err(Error::InvalidParameter(format!(
                "dense operand {:?} / output {:?} incompatible with a {}x{} matrix",
                x.dim(),
                out.dim(),
                self.node_count(),
                self.node_count()
            )));
        }
        let d = x.ncols();
        match (x.as_slice(), out.as_slice_mut()) {
            (Some(xs), Some(os)) if d > 0 => {
                os.par_chunks_mut(d).enumerate().for_each(|(i, row)| {
                    row.fill(T::zero());
                    let (cols, vals) = self.row(i);
                    for (idx, (&j, &w)) in cols.iter().zip(vals).enumerate() {
                        if let Some(&next) = cols.get(idx + AHEAD) {
                            crate::prefetch::row(&xs[next * d..(next + 1) * d]);
                        }
                        for (o, &v) in row.iter_mut().zip(&xs[j * d..(j + 1) * d]) {
                            *o += w * v;
                        }
                    }
                });
            }
            _ => {
                Zip::indexed(out.axis_iter_mut(Axis(0))).par_for_each(|i, mut row| {
                    row.fill(T::zero());
                    let (cols, vals) = self.row(i);
                    for (&j, &w) in cols.iter().zip(vals) {
                        for (o, &v) in row.iter_mut().zip(x.row(j).iter()) {
                            *o += w * v;
                        }
                    }
                });
            }
        }
        Ok(())
    }

    /// Dense copy, for tests and small graphs.
    pub fn to_dense(&self) -> Array2<T> {
        let n = self.node_count();
        let mut out = Array2::zeros((n, n));
        for i in 0..n {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                out[[i, j]] = v;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormalizationMode {
    /// `D^-1 A`
    Row,
    /// `D^-1/2 A D^-1/2`
    Symmetric,
}

impl fmt::Display for NormalizationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormalizationMode::Row => "row",
            NormalizationMode::Symmetric => "symmetric",
        })
    }
}

impl FromStr for NormalizationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "row" => Ok(Self::Row),
            "symmetric" | "sym" => Ok(Self::Symmetric),
            _ => Err(Error::InvalidParameter(format!(
                "unknown normalization {s:?}"
            ))),
        }
    }
}

/// Degree-normalized training adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedAdjacency<T> {
    pub mode: NormalizationMode,
    pub matrix: SparseMatrix<T>,
}

/// Normalizes the training edges of `split`. Nodes without training edges
/// keep an empty row.
pub fn normalize<T: Scalar>(split: &EdgeSplit, mode: NormalizationMode) -> NormalizedAdjacency<T> {
    let train = split.train();
    let deg = |i: NodeId| T::from_count(train.degree(i));
    let matrix = match mode {
        NormalizationMode::Row => SparseMatrix::from_pattern(train, |i, _| T::one() / deg(i)),
        NormalizationMode::Symmetric => {
            SparseMatrix::from_pattern(train, |i, j| T::one() / (deg(i) * deg(j)).sqrt())
        }
    };
    NormalizedAdjacency { mode, matrix }
}
