use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::graph::NodeId;
use crate::{Error, Result, Scalar};

/// Per-coordinate variance of the random projection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variance {
    /// `1/d`, so each row has unit expected squared norm.
    #[default]
    PerDimension,
    /// Standard normal coordinates; `R_i·R_i ~ χ²_d`.
    Unit,
}

impl fmt::Display for Variance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variance::PerDimension => "per-dimension",
            Variance::Unit => "unit",
        })
    }
}

impl FromStr for Variance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per-dimension" => Ok(Variance::PerDimension),
            "unit" => Ok(Variance::Unit),
            _ => Err(Error::InvalidParameter(format!("unknown variance {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EmbeddingKind {
    Raw { variance: Variance },
    Diffused { hops: usize, alpha: Vec<f64> },
}

/// Dense `n × d` node embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix<T> {
    pub values: Array2<T>,
    pub seed: u64,
    pub kind: EmbeddingKind,
}

/// Gaussian random projection drawn from a ChaCha8 stream seeded by `seed`,
/// filled row-major. The stream is platform independent; draws are taken in
/// `f64` and rounded, so `f32` matrices are the rounding of `f64` ones.
pub fn init_embeddings<T: Scalar>(
    n: usize,
    d: usize,
    seed: u64,
    variance: Variance,
) -> Result<EmbeddingMatrix<T>> {
    if n == 0 || d == 0 {
        return Err(Error::InvalidParameter(format!(
            "embedding shape must be positive, got {n}x{d}"
        )));
    }
    let scale = match variance {
        Variance::PerDimension => (1.0 / d as f64).sqrt(),
        Variance::Unit => 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = Array2::from_shape_simple_fn((n, d), || {
        let z: f64 = StandardNormal.sample(&mut rng);
        T::from_f64_lossy(z * scale)
    });
    Ok(EmbeddingMatrix {
        values,
        seed,
        kind: EmbeddingKind::Raw { variance },
    })
}

impl<T: Scalar> EmbeddingMatrix<T> {
    pub fn rows(&self) -> usize {
        self.values.nrows()
    }

    pub fn dim(&self) -> usize {
        self.values.ncols()
    }

    pub fn row(&self, node: NodeId) -> ArrayView1<'_, T> {
        self.values.row(node)
    }

    /// Little-endian binary: `n` and `d` as `u64`, then row-major `f64`s.
    pub fn write_binary<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&(self.rows() as u64).to_le_bytes())?;
        out.write_all(&(self.dim() as u64).to_le_bytes())?;
        for v in self.values.iter() {
            out.write_all(&v.as_f64().to_le_bytes())?;
        }
        Ok(())
    }
}

/// Reads the format of [`EmbeddingMatrix::write_binary`].
pub fn read_embedding_binary<R: Read>(mut input: R) -> Result<Array2<f64>> {
    let mut word = [0u8; 8];
    input.read_exact(&mut word)?;
    let n = u64::from_le_bytes(word) as usize;
    input.read_exact(&mut word)?;
    let d = u64::from_le_bytes(word) as usize;
    let mut values = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        input.read_exact(&mut word)?;
        values.push(f64::from_le_bytes(word));
    }
    Array2::from_shape_vec((n, d), values).map_err(|e| Error::Schema(e.to_string()))
}
