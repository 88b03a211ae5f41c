//! Correlation, binning and distribution-shift analytics over per-node
//! tables. All statistics are computed in `f64`.

mod report;
mod stats;
mod table;

pub use report::{
    bin_report, correlation_report, tds_report, Bin, BinReport, CorrelationReport, ShiftSummary,
    TdsReport,
};
pub use stats::{
    pearson, pearson_pairwise, quantile, spearman, spearman_pairwise, PairedStatistic,
};
pub use table::{column_name, metric_column, Column, NodeTable, Provenance};
