use std::io::Write;

use serde::Serialize;

use super::stats::{pearson_pairwise, quantile, PairedStatistic};
use super::table::{column_name, metric_column, NodeTable};
use crate::graph::SplitType;
use crate::{Error, Result};

/// Correlation of one metric at several cutoffs against one topology column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub metric: String,
    pub against: String,
    pub per_k: Vec<(usize, PairedStatistic)>,
    pub absolute_avg: f64,
    pub basic_avg: f64,
}

impl CorrelationReport {
    /// Per-K coefficients followed by the absolute and basic averages.
    pub fn row(&self) -> Vec<f64> {
        let mut row: Vec<f64> = self.per_k.iter().map(|(_, s)| s.value).collect();
        row.push(self.absolute_avg);
        row.push(self.basic_avg);
        row
    }

    /// `metric,against,K,r,used,excluded`, then `avg_abs` and `avg` rows with
    /// an empty K.
    pub fn write_csv<W: Write>(&self, mut out: W, header: bool) -> Result<()> {
        if header {
            writeln!(out, "metric,against,K,r,used,excluded")?;
        }
        for (k, s) in &self.per_k {
            writeln!(
                out,
                "{},{},{k},{},{},{}",
                self.metric, self.against, s.value, s.used, s.excluded
            )?;
        }
        writeln!(
            out,
            "{},{},avg_abs,{},,",
            self.metric, self.against, self.absolute_avg
        )?;
        writeln!(
            out,
            "{},{},avg,{},,",
            self.metric, self.against, self.basic_avg
        )?;
        Ok(())
    }
}

pub fn correlation_report(
    table: &NodeTable,
    metric: &str,
    ks: &[usize],
    against: &str,
) -> Result<CorrelationReport> {
    if ks.is_empty() {
        return Err(Error::InvalidParameter("no cutoffs given".into()));
    }
    let x = table.column(against)?;
    let mut per_k = Vec::with_capacity(ks.len());
    for &k in ks {
        let y = table.column(&metric_column(metric, k))?;
        per_k.push((k, pearson_pairwise(x, y)?));
    }
    let count = per_k.len() as f64;
    Ok(CorrelationReport {
        metric: metric.to_string(),
        against: against.to_string(),
        absolute_avg: per_k.iter().map(|(_, s)| s.value.abs()).sum::<f64>() / count,
        basic_avg: per_k.iter().map(|(_, s)| s.value).sum::<f64>() / count,
        per_k,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Bin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BinReport {
    pub by: String,
    pub value: String,
    pub bins: Vec<Bin>,
    /// Rows with either entry missing.
    pub missing: usize,
    /// Complete rows outside the outer edges.
    pub out_of_range: usize,
}

impl BinReport {
    /// `lower,upper,count,mean`
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "lower,upper,count,mean")?;
        for b in &self.bins {
            let mean = b.mean.map(|m| m.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{},{mean}", b.lower, b.upper, b.count)?;
        }
        Ok(())
    }
}

/// Groups rows by `by` into `[e_i, e_{i+1})` bins (the last one closed) and
/// averages `value` in each.
pub fn bin_report(table: &NodeTable, by: &str, edges: &[f64], value: &str) -> Result<BinReport> {
    if edges.len() < 2
        || edges
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(Error::InvalidParameter(
            "bin edges must be at least two strictly increasing values".into(),
        ));
    }
    let keys = table.column(by)?;
    let vals = table.column(value)?;
    let nbins = edges.len() - 1;
    let mut sums = vec![0.0; nbins];
    let mut counts = vec![0usize; nbins];
    let (mut missing, mut out_of_range) = (0, 0);
    for (key, v) in keys.iter().zip(vals) {
        let (Some(key), Some(v)) = (key, v) else {
            missing += 1;
            continue;
        };
        let last = edges[nbins];
        if *key < edges[0] || *key > last || key.is_nan() {
            out_of_range += 1;
            continue;
        }
        let b = if *key == last {
            nbins - 1
        } else {
            edges.partition_point(|e| e <= key) - 1
        };
        sums[b] += v;
        counts[b] += 1;
    }
    let bins = (0..nbins)
        .map(|b| Bin {
            lower: edges[b],
            upper: edges[b + 1],
            count: counts[b],
            mean: (counts[b] > 0).then(|| sums[b] / counts[b] as f64),
        })
        .collect();
    Ok(BinReport {
        by: by.to_string(),
        value: value.to_string(),
        bins,
        missing,
        out_of_range,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftSummary {
    pub mean: f64,
    pub median: f64,
    /// 10th through 90th percentiles.
    pub deciles: [f64; 9],
}

/// Per-node validation-minus-test concentration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TdsReport {
    pub shifts: Vec<Option<f64>>,
    pub summary: ShiftSummary,
    pub evaluated: usize,
    pub excluded: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_correlation: Option<PairedStatistic>,
}

impl TdsReport {
    /// `node_label,shift`, missing shifts left empty.
    pub fn write_csv<W: Write>(&self, mut out: W, labels: &[String]) -> Result<()> {
        writeln!(out, "node_label,shift")?;
        for (label, s) in labels.iter().zip(&self.shifts) {
            let s = s.map(|v| v.to_string()).unwrap_or_default();
            writeln!(out, "{label},{s}")?;
        }
        Ok(())
    }

    /// Summary without the per-node shifts.
    pub fn write_summary_json<W: Write>(&self, out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Summary<'a> {
            #[serde(flatten)]
            summary: &'a ShiftSummary,
            evaluated: usize,
            excluded: usize,
            #[serde(skip_serializing_if = "Option::is_none")]
            gap_correlation: Option<PairedStatistic>,
        }
        serde_json::to_writer_pretty(
            out,
            &Summary {
                summary: &self.summary,
                evaluated: self.evaluated,
                excluded: self.excluded,
                gap_correlation: self.gap_correlation,
            },
        )?;
        Ok(())
    }
}

/// Shift `tc_val - tc_te` per node, with an optional Pearson correlation
/// against a per-node performance-gap column.
pub fn tds_report(table: &NodeTable, gap: Option<&str>) -> Result<TdsReport> {
    let val = table.column(&column_name("tc", SplitType::Val))?;
    let te = table.column(&column_name("tc", SplitType::Test))?;
    let shifts: Vec<Option<f64>> = val
        .iter()
        .zip(te)
        .map(|(v, t)| Some((*v)? - (*t)?))
        .collect();
    let mut sorted: Vec<f64> = shifts.iter().flatten().copied().collect();
    if sorted.is_empty() {
        return Err(Error::UndefinedStatistic(
            "no node has both validation and test concentration".into(),
        ));
    }
    let mean = sorted.iter().sum::<f64>() / sorted.len() as f64;
    sorted.sort_by(f64::total_cmp);
    let mut deciles = [0.0; 9];
    for (i, d) in deciles.iter_mut().enumerate() {
        *d = quantile(&sorted, (i + 1) as f64 / 10.0)?;
    }
    let gap_correlation = gap
        .map(|name| pearson_pairwise(&shifts, table.column(name)?))
        .transpose()?;
    Ok(TdsReport {
        summary: ShiftSummary {
            mean,
            median: quantile(&sorted, 0.5)?,
            deciles,
        },
        evaluated: sorted.len(),
        excluded: shifts.len() - sorted.len(),
        shifts,
        gap_correlation,
    })
}
