//! Wall-clock scaling checks, kept in their own binary so no other test
//! competes for the cores while they run.

use std::time::Instant;

use topoconc::graph::{gnm, EdgeSplit};
use topoconc::reweight::{run_reweighting, DotProduct, ReweightConfig, SoftmaxDomain};

fn one_update_seconds(m: usize) -> f64 {
    let split = EdgeSplit::all_train(&gnm(m / 5, m, 3));
    let cfg = ReweightConfig {
        iterations: 1,
        dim: 64,
        domain: Some(SoftmaxDomain::Neighbors),
        ..ReweightConfig::default()
    };
    (0..5)
        .map(|_| {
            let t = Instant::now();
            run_reweighting::<f64, _>(&split, &DotProduct, &cfg).unwrap();
            t.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn update_cost_scales_linearly() {
    let times: Vec<f64> = [25_000, 50_000, 100_000, 200_000]
        .into_iter()
        .map(one_update_seconds)
        .collect();
    for w in times.windows(2) {
        let ratio = w[1] / w[0];
        assert!((1.4..=2.6).contains(&ratio), "ratios from {times:?}");
    }
}
