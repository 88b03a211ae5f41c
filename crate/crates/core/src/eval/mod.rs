//! Node-centric and link-centric link prediction evaluation.

mod bias;
mod metrics;
mod predictor;

pub use bias::{
    chi_square_gof, expected_metrics_untrained, hypergeometric_pmf, simulate_untrained,
    BiasExpectation, BiasOracle, BiasSimulation, ChiSquareTest, Estimate,
};
pub use metrics::{
    evaluate, full_mrr, link_hits_at_k, node_metrics, rank_candidates, MetricAggregate,
    MetricReport, MetricRow, NodeMetrics, Ranking, METRIC_NAMES,
};
pub use predictor::{diffusion_predictor, DiffusionPredictor};
