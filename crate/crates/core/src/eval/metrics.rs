use std::cmp::Ordering;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{EdgeSplit, NodeId, SplitType};
use crate::{Error, Result, Scalar};

/// Candidates for one owner, best first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ranking {
    pub owner: NodeId,
    pub candidates: Vec<NodeId>,
}

/// Ranks every node except the owner (and, with `exclude_train`, its
/// training neighbors) by descending score. Ties go to the smaller id; NaN
/// scores sort last.
pub fn rank_candidates<T: Scalar>(
    scores: &[T],
    owner: NodeId,
    exclude_train: bool,
    split: &EdgeSplit,
) -> Ranking {
    let excluded: &[NodeId] = if exclude_train {
        split.neighbors(owner, SplitType::Train)
    } else {
        &[]
    };
    let mut candidates: Vec<NodeId> = (0..scores.len())
        .filter(|&j| j != owner && excluded.binary_search(&j).is_err())
        .collect();
    candidates.sort_by(|&a, &b| descending(scores[a], scores[b]).then(a.cmp(&b)));
    Ranking { owner, candidates }
}

fn descending<T: Scalar>(a: T, b: T) -> Ordering {
    match (a.is_nan(), b.is_nan()) {
        (true, true) => Ordering::Equal,
        (true, false) => Ordering::Greater,
        (false, true) => Ordering::Less,
        _ => b.partial_cmp(&a).unwrap(),
    }
}

/// Ranking quality at one cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct NodeMetrics<T> {
    pub recall: T,
    pub precision: T,
    pub f1: T,
    pub ndcg: T,
    pub mrr: T,
    pub hits: T,
}

impl<T: Scalar> NodeMetrics<T> {
    pub fn as_array(&self) -> [T; 6] {
        [
            self.recall,
            self.precision,
            self.f1,
            self.ndcg,
            self.mrr,
            self.hits,
        ]
    }
}

pub const METRIC_NAMES: [&str; 6] = ["recall", "precision", "f1", "ndcg", "mrr", "hits"];

fn check_truth(truth: &[NodeId]) -> Result<Vec<NodeId>> {
    if truth.is_empty() {
        return Err(Error::InvalidParameter("ground truth is empty".into()));
    }
    let mut sorted = truth.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    Ok(sorted)
}

/// Recall, precision, F1, NDCG, MRR and node-level hit indicator of the top
/// `k` candidates against `truth`.
///
/// NDCG divides by `Σ_{r=1..k} 1/log2(r+1)` regardless of the truth size;
/// MRR is 0 when no truth member reaches the top `k`.
pub fn node_metrics<T: Scalar>(
    ranking: &Ranking,
    truth: &[NodeId],
    k: usize,
) -> Result<NodeMetrics<T>> {
    if k < 1 {
        return Err(Error::InvalidParameter("cutoff must be at least 1".into()));
    }
    let truth = check_truth(truth)?;
    let mut found = 0usize;
    let mut dcg = T::zero();
    let mut ideal = T::zero();
    let mut first_hit: Option<usize> = None;
    for rank in 1..=k {
        let discount = T::one() / T::from_count(rank + 1).log2();
        ideal += discount;
        let Some(&c) = ranking.candidates.get(rank - 1) else {
            continue;
        };
        if truth.binary_search(&c).is_ok() {
            found += 1;
            dcg += discount;
            first_hit.get_or_insert(rank);
        }
    }
    let hits = T::from_count(found);
    let truth_len = T::from_count(truth.len());
    let cutoff = T::from_count(k);
    Ok(NodeMetrics {
        recall: hits / truth_len,
        precision: hits / cutoff,
        f1: (T::one() + T::one()) * hits / (cutoff + truth_len),
        ndcg: dcg / ideal,
        mrr: first_hit.map_or(T::zero(), |r| T::one() / T::from_count(r)),
        hits: if found > 0 { T::one() } else { T::zero() },
    })
}

/// Reciprocal rank of the first truth member anywhere in the ranking.
pub fn full_mrr<T: Scalar>(ranking: &Ranking, truth: &[NodeId]) -> Result<T> {
    let truth = check_truth(truth)?;
    Ok(ranking
        .candidates
        .iter()
        .position(|c| truth.binary_search(c).is_ok())
        .map_or(T::zero(), |p| T::one() / T::from_count(p + 1)))
}

/// Fraction of positive scores strictly above the `k`-th largest negative.
pub fn link_hits_at_k<T: Scalar>(positives: &[T], negatives: &[T], k: usize) -> Result<T> {
    if positives.is_empty() || negatives.is_empty() {
        return Err(Error::InvalidParameter(
            "score lists must be non-empty".into(),
        ));
    }
    if k < 1 || k > negatives.len() {
        return Err(Error::InvalidParameter(format!(
            "cutoff {k} outside 1..={}",
            negatives.len()
        )));
    }
    let mut sorted = negatives.to_vec();
    sorted.sort_by(|a, b| descending(*a, *b));
    let threshold = sorted[k - 1];
    let above = positives.iter().filter(|&&p| p > threshold).count();
    Ok(T::from_count(above) / T::from_count(positives.len()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricRow<T> {
    pub node: NodeId,
    pub k: usize,
    pub metrics: NodeMetrics<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricAggregate {
    pub k: usize,
    pub count: usize,
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub ndcg: f64,
    pub mrr: f64,
    pub hits: f64,
}

/// Per-node metrics at each cutoff, plus unweighted means over evaluated
/// nodes. Nodes with an empty ground truth are not evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport<T> {
    pub ks: Vec<usize>,
    pub rows: Vec<MetricRow<T>>,
    pub aggregates: Vec<MetricAggregate>,
    /// Per evaluated node, reciprocal rank over the whole candidate list.
    pub full_mrr: Vec<(NodeId, T)>,
    pub mean_full_mrr: f64,
}

/// Rows of one node at every cutoff and its full-ranking MRR.
type NodeRows<T> = (Vec<MetricRow<T>>, T);

/// Ranks every node's candidates with `scores(node)` and compares them with
/// its `truth` split-type neighbors.
pub fn evaluate<T, F>(
    split: &EdgeSplit,
    scores: F,
    ks: &[usize],
    exclude_train: bool,
    truth: SplitType,
) -> Result<MetricReport<T>>
where
    T: Scalar,
    F: Fn(NodeId) -> Vec<T> + Sync,
{
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::InvalidParameter(
            "cutoffs must be non-empty and positive".into(),
        ));
    }
    let n = split.node_count();
    let per_node: Vec<Result<Option<NodeRows<T>>>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let gt = split.neighbors(i, truth);
            if gt.is_empty() {
                return Ok(None);
            }
            let row = scores(i);
            if row.len() != n {
                return Err(Error::InvalidParameter(format!(
                    "score row for node {i} has {} entries, expected {n}",
                    row.len()
                )));
            }
            let ranking = rank_candidates(&row, i, exclude_train, split);
            let rows = ks
                .iter()
                .map(|&k| {
                    Ok(MetricRow {
                        node: i,
                        k,
                        metrics: node_metrics(&ranking, gt, k)?,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Some((rows, full_mrr(&ranking, gt)?)))
        })
        .collect();

    let mut rows = Vec::new();
    let mut mrr_all = Vec::new();
    for item in per_node {
        if let Some((r, m)) = item? {
            mrr_all.push((r[0].node, m));
            rows.extend(r);
        }
    }
    let aggregates = ks
        .iter()
        .map(|&k| {
            let selected: Vec<[f64; 6]> = rows
                .iter()
                .filter(|r| r.k == k)
                .map(|r| r.metrics.as_array().map(Scalar::as_f64))
                .collect();
            let count = selected.len();
            let mean = |m: usize| {
                if count == 0 {
                    0.0
                } else {
                    selected.iter().map(|v| v[m]).sum::<f64>() / count as f64
                }
            };
            MetricAggregate {
                k,
                count,
                recall: mean(0),
                precision: mean(1),
                f1: mean(2),
                ndcg: mean(3),
                mrr: mean(4),
                hits: mean(5),
            }
        })
        .collect();
    let mean_full_mrr = if mrr_all.is_empty() {
        0.0
    } else {
        mrr_all.iter().map(|(_, m)| m.as_f64()).sum::<f64>() / mrr_all.len() as f64
    };
    Ok(MetricReport {
        ks: ks.to_vec(),
        rows,
        aggregates,
        full_mrr: mrr_all,
        mean_full_mrr,
    })
}

impl<T: Scalar> MetricReport<T> {
    /// `node_label,K,recall,precision,f1,ndcg,mrr,hits`
    pub fn write_csv<W: Write>(&self, mut out: W, labels: &[String]) -> Result<()> {
        writeln!(out, "node_label,K,{}", METRIC_NAMES.join(","))?;
        for r in &self.rows {
            let m = r.metrics.as_array().map(Scalar::as_f64);
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                labels[r.node], r.k, m[0], m[1], m[2], m[3], m[4], m[5]
            )?;
        }
        Ok(())
    }

    /// Aggregate means and counts per cutoff as JSON.
    pub fn write_aggregate_json<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Aggregate<'a> {
            per_k: &'a [MetricAggregate],
            mrr_full: f64,
            evaluated_nodes: usize,
        }
        serde_json::to_writer_pretty(
            out,
            &Aggregate {
                per_k: &self.aggregates,
                mrr_full: self.mean_full_mrr,
                evaluated_nodes: self.full_mrr.len(),
            },
        )?;
        Ok(())
    }
}
