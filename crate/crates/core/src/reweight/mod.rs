//! Concentration-enhancing edge reweighting of the message-passing adjacency.
//!
//! Every `interval` iterations after `warmup`, each training edge `(i, j)`
//! gains `γ · softmax_j g(N_i, H_j)`, where `H` are embeddings diffused over
//! the current adjacency and `N = Ã H` their neighborhood averages. Entries
//! outside the training pattern stay zero. The model parameters of a trained
//! encoder are out of scope here: `g` is any [`LinkPredictor`], typically the
//! dot product of training-free diffused embeddings.

mod predictor;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use ndarray::{Array2, ArrayView1, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atc::{default_alpha, diffuse_with, init_embeddings, Variance};
use crate::concentration::weighted_tc;
use crate::graph::{normalize, EdgeSplit, NodeId, NormalizationMode, SparseMatrix, SplitType};
use crate::{Error, Result, Scalar};

pub use predictor::{CommonNeighbors, DotProduct, LinkPredictor};

/// Normalization domain of the score softmax.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SoftmaxDomain {
    /// Over all `n` nodes.
    Full,
    /// Over the node's training neighbors only.
    Neighbors,
}

impl SoftmaxDomain {
    pub const FULL_DOMAIN_LIMIT: usize = 10_000;

    /// `Full` up to [`Self::FULL_DOMAIN_LIMIT`] nodes, `Neighbors` above.
    pub fn auto(n: usize) -> Self {
        if n > Self::FULL_DOMAIN_LIMIT {
            SoftmaxDomain::Neighbors
        } else {
            SoftmaxDomain::Full
        }
    }
}

impl fmt::Display for SoftmaxDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SoftmaxDomain::Full => "full",
            SoftmaxDomain::Neighbors => "neighbors",
        })
    }
}

impl FromStr for SoftmaxDomain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(SoftmaxDomain::Full),
            "neighbors" => Ok(SoftmaxDomain::Neighbors),
            _ => Err(Error::InvalidParameter(format!(
                "unknown softmax domain {s:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub tau: usize,
    pub mean_weighted_tc: f64,
}

/// Current reweighted adjacency `Ã^τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReweightState<T> {
    pub adj: SparseMatrix<T>,
    pub tau: usize,
    pub gamma: f64,
    pub history: Vec<TracePoint>,
}

impl<T: Scalar> ReweightState<T> {
    /// Starts from the row-normalized training adjacency.
    pub fn new(split: &EdgeSplit, gamma: f64) -> Self {
        Self {
            adj: normalize(split, NormalizationMode::Row).matrix,
            tau: 0,
            gamma,
            history: Vec::new(),
        }
    }

    /// `src,dst,weight` for every stored entry.
    pub fn write_adjacency_csv<W: Write>(&self, mut out: W, labels: &[String]) -> Result<()> {
        writeln!(out, "src,dst,weight")?;
        for i in 0..self.adj.node_count() {
            let (cols, vals) = self.adj.row(i);
            for (&j, &w) in cols.iter().zip(vals) {
                writeln!(out, "{},{},{}", labels[i], labels[j], w.as_f64())?;
            }
        }
        Ok(())
    }
}

/// `Ã H`: one sparse-dense product.
pub fn neighborhood_embeddings<T: Scalar>(
    adj: &SparseMatrix<T>,
    h: ArrayView2<'_, T>,
) -> Result<Array2<T>> {
    adj.mul_dense(h)
}

/// Softmax of predictor logits for one node.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxScores<T> {
    pub domain: SoftmaxDomain,
    pub candidates: Vec<NodeId>,
    pub values: Vec<T>,
}

impl<T: Scalar> SoftmaxScores<T> {
    pub fn get(&self, j: NodeId) -> Option<T> {
        match self.domain {
            SoftmaxDomain::Full => self.values.get(j).copied(),
            SoftmaxDomain::Neighbors => self
                .candidates
                .binary_search(&j)
                .ok()
                .map(|p| self.values[p]),
        }
    }

    /// Scores at `nodes` (missing entries are 0).
    pub fn restricted_to(&self, nodes: &[NodeId]) -> Vec<T> {
        nodes
            .iter()
            .map(|&j| self.get(j).unwrap_or_else(T::zero))
            .collect()
    }
}

fn softmax<T: Scalar>(logits: &[T]) -> Vec<T> {
    let max = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = logits.iter().map(|&l| (l - max).exp()).collect();
    let total: T = exps.iter().copied().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Softmax over `g(N_node, H_j)`, with `j` ranging over all nodes or the
/// node's training neighbors. Returns `None` in the neighbors domain for a
/// node without training neighbors.
pub fn score_softmax<T: Scalar, P: LinkPredictor<T> + ?Sized>(
    node: NodeId,
    neighborhood: ArrayView1<'_, T>,
    h: ArrayView2<'_, T>,
    predictor: &P,
    domain: SoftmaxDomain,
    split: &EdgeSplit,
) -> Result<Option<SoftmaxScores<T>>> {
    if h.nrows() != split.node_count() || node >= split.node_count() {
        return Err(Error::InvalidParameter(format!(
            "embedding rows {} / node {node} inconsistent with {} nodes",
            h.nrows(),
            split.node_count()
        )));
    }
    let candidates: Vec<NodeId> = match domain {
        SoftmaxDomain::Full => (0..split.node_count()).collect(),
        SoftmaxDomain::Neighbors => {
            let nb = split.neighbors(node, SplitType::Train);
            if nb.is_empty() {
                return Ok(None);
            }
            nb.to_vec()
        }
    };
    let logits: Vec<T> = candidates
        .iter()
        .map(|&j| predictor.score(node, j, neighborhood, h.row(j)))
        .collect();
    Ok(Some(SoftmaxScores {
        domain,
        values: softmax(&logits),
        candidates,
    }))
}

/// Adds `γ · S` on the stored pattern of `state.adj`.
///
/// `scores` may only hold nonzero entries at positions where the training
/// adjacency is nonzero, and must be non-negative.
pub fn reweight_step<T: Scalar>(
    state: &ReweightState<T>,
    scores: &SparseMatrix<T>,
    gamma: f64,
) -> Result<ReweightState<T>> {
    if !(gamma.is_finite() && gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be >= 0, got {gamma}"
        )));
    }
    if scores.node_count() != state.adj.node_count() {
        return Err(Error::InvalidScores(format!(
            "score matrix is {0}x{0}, adjacency is {1}x{1}",
            scores.node_count(),
            state.adj.node_count()
        )));
    }
    let g = T::from_f64_lossy(gamma);
    let mut next = state.adj.clone();
    for i in 0..scores.node_count() {
        let (cols, vals) = scores.row(i);
        for (&j, &s) in cols.iter().zip(vals) {
            if !(s.is_finite() && s >= T::zero()) {
                return Err(Error::InvalidScores(format!("score ({i}, {j}) = {s}")));
            }
            match state.adj.position(i, j) {
                Some(pos) => next.values_mut()[pos] += g * s,
                None if s == T::zero() => {}
                None => {
                    return Err(Error::InvalidScores(format!(
                        "score at ({i}, {j}) lies outside the training edges"
                    )))
                }
            }
        }
    }
    Ok(ReweightState {
        adj: next,
        tau: state.tau + 1,
        gamma,
        history: state.history.clone(),
    })
}

/// Mean one-hop weighted concentration, weighting each node's training
/// neighbors by its normalized adjacency row. Nodes without training
/// neighbors are skipped.
pub fn mean_weighted_tc<T: Scalar>(split: &EdgeSplit, adj: &SparseMatrix<T>) -> Result<f64> {
    let values: Vec<Option<f64>> = (0..split.node_count())
        .into_par_iter()
        .map(|i| {
            let (_, vals) = adj.row(i);
            let total: T = vals.iter().copied().sum();
            if vals.is_empty() || total <= T::zero() {
                return Ok(None);
            }
            let w: Vec<T> = vals.iter().map(|&v| v / total).collect();
            Ok(weighted_tc(split, i, &w)?.map(Scalar::as_f64))
        })
        .collect::<Result<_>>()?;
    let defined: Vec<f64> = values.into_iter().flatten().collect();
    if defined.is_empty() {
        return Ok(0.0);
    }
    Ok(defined.iter().sum::<f64>() / defined.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReweightConfig {
    pub iterations: usize,
    pub interval: usize,
    pub warmup: usize,
    pub gamma: f64,
    pub dim: usize,
    pub alpha: Vec<f64>,
    pub variance: Variance,
    pub seed: u64,
    /// `None` picks [`SoftmaxDomain::auto`].
    pub domain: Option<SoftmaxDomain>,
    pub renormalize: bool,
}

impl Default for ReweightConfig {
    fn default() -> Self {
        Self {
            iterations: 10,
            interval: 1,
            warmup: 0,
            gamma: 0.1,
            dim: 64,
            alpha: default_alpha(2, 0.5),
            variance: Variance::PerDimension,
            seed: 0,
            domain: None,
            renormalize: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReweightRun<T> {
    pub state: ReweightState<T>,
    pub initial_weighted_tc: f64,
    pub updates: usize,
}

impl<T: Scalar> ReweightRun<T> {
    /// `tau,mean_weighted_tc`
    pub fn write_trace_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "tau,mean_weighted_tc")?;
        writeln!(out, "0,{}", self.initial_weighted_tc)?;
        for p in &self.state.history {
            writeln!(out, "{},{}", p.tau, p.mean_weighted_tc)?;
        }
        Ok(())
    }
}

/// One adjacency update: diffuse over `Ã^{τ-1}`, average with the original
/// `Ã`, score every training edge through the softmax.
fn update_scores<T: Scalar, P: LinkPredictor<T> + ?Sized>(
    split: &EdgeSplit,
    base: &SparseMatrix<T>,
    current: &SparseMatrix<T>,
    raw: &crate::atc::EmbeddingMatrix<T>,
    predictor: &P,
    config: &ReweightConfig,
    domain: SoftmaxDomain,
) -> Result<SparseMatrix<T>> {
    let h = diffuse_with(current, raw, &config.alpha)?.values;
    let nbhd = neighborhood_embeddings(base, h.view())?;
    let rows: Vec<Vec<T>> = (0..split.node_count())
        .into_par_iter()
        .map(|i| {
            let train = split.neighbors(i, SplitType::Train);
            if train.is_empty() {
                return Ok(Vec::new());
            }
            let s = score_softmax(i, nbhd.row(i), h.view(), predictor, domain, split)?
                .expect("node has training neighbors");
            Ok(s.restricted_to(train))
        })
        .collect::<Result<_>>()?;
    let mut flat = rows.into_iter().flatten();
    Ok(SparseMatrix::from_pattern(split.train(), |_, _| {
        flat.next().expect("one score per training entry")
    }))
}

/// Runs the reweighting schedule for `config.iterations` iterations and
/// records the mean weighted concentration after each update.
pub fn run_reweighting<T: Scalar, P: LinkPredictor<T> + ?Sized>(
    split: &EdgeSplit,
    predictor: &P,
    config: &ReweightConfig,
) -> Result<ReweightRun<T>> {
    if config.interval < 1 {
        return Err(Error::InvalidParameter(
            "update interval must be >= 1".into(),
        ));
    }
    if !(config.gamma.is_finite() && config.gamma >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gamma must be >= 0, got {}",
            config.gamma
        )));
    }
    let n = split.node_count();
    let domain = config.domain.unwrap_or_else(|| SoftmaxDomain::auto(n));
    let base = normalize::<T>(split, NormalizationMode::Row).matrix;
    let raw = init_embeddings::<T>(n.max(1), config.dim, config.seed, config.variance)?;
    let mut state = ReweightState {
        adj: base.clone(),
        tau: 0,
        gamma: config.gamma,
        history: Vec::new(),
    };
    let initial_weighted_tc = mean_weighted_tc(split, &state.adj)?;
    let mut updates = 0;
    for tau in 1..=config.iterations {
        if tau % config.interval == 0 && tau > config.warmup {
            let scores = update_scores(split, &base, &state.adj, &raw, predictor, config, domain)?;
            state = reweight_step(&state, &scores, config.gamma)?;
            if config.renormalize {
                state.adj.renormalize_rows();
            }
            updates += 1;
            let mean = mean_weighted_tc(split, &state.adj)?;
            state.history.push(TracePoint {
                tau,
                mean_weighted_tc: mean,
            });
        }
        state.tau = tau;
    }
    Ok(ReweightRun {
        state,
        initial_weighted_tc,
        updates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn split_of(n: usize, edges: &[(usize, usize)]) -> EdgeSplit {
        EdgeSplit::all_train(&Graph::from_edges(n, edges.iter().copied()))
    }

    #[test]
    fn uniform_and_analytic_softmax() {
        assert_eq!(softmax(&[0.3, 0.3]), vec![0.5, 0.5]);
        let s = softmax(&[1.0f64, 0.0]);
        let e = std::f64::consts::E;
        assert!((s[0] - e / (e + 1.0)).abs() < 1e-15);
        assert!((s[0] - 0.7311).abs() < 1e-4 && (s[1] - 0.2689).abs() < 1e-4);
        // stable for large logits
        let big = softmax(&[1000.0f64, 999.0]);
        assert!((big[0] - e / (e + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn path_step_by_hand() {
        let split = split_of(3, &[(0, 1), (1, 2)]);
        let state = ReweightState::<f64>::new(&split, 0.1);
        let s = SparseMatrix::from_triplets(3, &[(1, 0, 0.5), (1, 2, 0.5)]).unwrap();
        let next = reweight_step(&state, &s, 0.1).unwrap();
        assert!((next.adj.get(1, 0).unwrap() - 0.55).abs() < 1e-15);
        assert!((next.adj.get(1, 2).unwrap() - 0.55).abs() < 1e-15);
        assert_eq!(next.adj.get(0, 1), Some(1.0));
        assert_eq!(next.tau, 1);
    }

    #[test]
    fn zero_gamma_is_identity() {
        let split = split_of(4, &[(0, 1), (1, 2), (2, 0), (2, 3)]);
        let state = ReweightState::<f64>::new(&split, 0.0);
        let s = SparseMatrix::from_pattern(split.train(), |_, _| 0.3);
        assert_eq!(reweight_step(&state, &s, 0.0).unwrap().adj, state.adj);
    }

    #[test]
    fn scores_outside_pattern_rejected() {
        let split = split_of(3, &[(0, 1), (1, 2)]);
        let state = ReweightState::<f64>::new(&split, 0.1);
        let bad = SparseMatrix::from_triplets(3, &[(0, 2, 0.4)]).unwrap();
        assert!(matches!(
            reweight_step(&state, &bad, 0.1),
            Err(Error::InvalidScores(_))
        ));
        let explicit_zero = SparseMatrix::from_triplets(3, &[(0, 2, 0.0)]).unwrap();
        assert!(reweight_step(&state, &explicit_zero, 0.1).is_ok());
        let negative = SparseMatrix::from_triplets(3, &[(0, 1, -0.1)]).unwrap();
        assert!(matches!(
            reweight_step(&state, &negative, 0.1),
            Err(Error::InvalidScores(_))
        ));
    }

    #[test]
    fn neighbors_domain_needs_neighbors() {
        let split = split_of(3, &[(0, 1)]);
        let h = Array2::<f64>::zeros((3, 2));
        let out = score_softmax(
            2,
            h.row(2),
            h.view(),
            &DotProduct,
            SoftmaxDomain::Neighbors,
            &split,
        )
        .unwrap();
        assert!(out.is_none());
        let full = score_softmax(
            2,
            h.row(2),
            h.view(),
            &DotProduct,
            SoftmaxDomain::Full,
            &split,
        )
        .unwrap()
        .unwrap();
        assert_eq!(full.values, vec![1.0 / 3.0; 3]);
    }

    #[test]
    fn schedule_validation() {
        let split = split_of(3, &[(0, 1), (1, 2), (2, 0)]);
        let config = ReweightConfig {
            interval: 0,
            ..ReweightConfig::default()
        };
        assert!(run_reweighting::<f64, _>(&split, &DotProduct, &config).is_err());
    }

    #[test]
    fn auto_domain() {
        assert_eq!(SoftmaxDomain::auto(200), SoftmaxDomain::Full);
        assert_eq!(SoftmaxDomain::auto(10_001), SoftmaxDomain::Neighbors);
    }
}
