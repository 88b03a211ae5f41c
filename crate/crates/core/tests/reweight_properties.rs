use ndarray::Array2;
use proptest::prelude::*;
use topoconc::atc::Variance;
use topoconc::concentration::{common_neighbor_count, tc, weighted_tc, NormMode, TcParams};
use topoconc::graph::{
    erdos_renyi, split_edges, stochastic_block_model, EdgeSplit, Graph, SparseMatrix, SplitRatios,
    SplitStrategy, SplitType,
};
use topoconc::reweight::{
    reweight_step, run_reweighting, score_softmax, CommonNeighbors, DotProduct, ReweightConfig,
    ReweightState, SoftmaxDomain,
};

fn source_tc(split: &EdgeSplit, i: usize) -> Option<f64> {
    tc::<f64>(
        split,
        i,
        SplitType::Train,
        TcParams::new(1, 1.0, NormMode::Source).unwrap(),
    )
    .unwrap()
    .value
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn comonotone_weights_dominate(seed in 0u64..1_000_000, n in 3usize..41, p in 0.08f64..0.5, power in 0.1f64..4.0) {
        let split = EdgeSplit::all_train(&erdos_renyi(n, p, seed));
        for i in 0..n {
            let nb = split.neighbors(i, SplitType::Train);
            if nb.is_empty() {
                continue;
            }
            let raw: Vec<f64> = nb
                .iter()
                .map(|&j| (common_neighbor_count(&split, i, j) as f64 + 0.5).powf(power))
                .collect();
            let total: f64 = raw.iter().sum();
            let s: Vec<f64> = raw.iter().map(|v| v / total).collect();
            let w = weighted_tc(&split, i, &s).unwrap().unwrap();
            prop_assert!(w >= source_tc(&split, i).unwrap() - 1e-12);
        }
    }
}

#[test]
fn softmax_increment_dominates_on_random_graphs() {
    for seed in 0..100u64 {
        let n = 10 + (seed as usize % 31);
        let split = EdgeSplit::all_train(&erdos_renyi(n, 0.2, seed));
        let h = Array2::<f64>::zeros((n, 4));
        let cn = CommonNeighbors::new(&split);
        for i in 0..n {
            let nb = split.neighbors(i, SplitType::Train);
            let Some(s) =
                score_softmax(i, h.row(i), h.view(), &cn, SoftmaxDomain::Neighbors, &split)
                    .unwrap()
            else {
                continue;
            };
            let w = weighted_tc(&split, i, &s.restricted_to(nb))
                .unwrap()
                .unwrap();
            assert!(w >= source_tc(&split, i).unwrap() - 1e-12);
        }
    }
}

fn uniform_scores(split: &EdgeSplit) -> SparseMatrix<f64> {
    SparseMatrix::from_pattern(split.train(), |i, _| 1.0 / split.train_degree(i) as f64)
}

#[test]
fn increment_is_linear_in_gamma() {
    let split = EdgeSplit::all_train(&erdos_renyi(25, 0.2, 8));
    let state = ReweightState::<f64>::new(&split, 0.0);
    let s = uniform_scores(&split);
    let one = reweight_step(&state, &s, 0.05).unwrap();
    let two = reweight_step(&state, &s, 0.1).unwrap();
    for ((a, b), c) in one
        .adj
        .values()
        .iter()
        .zip(two.adj.values())
        .zip(state.adj.values())
    {
        assert!(((b - c) - 2.0 * (a - c)).abs() < 1e-15);
    }
}

#[test]
fn pattern_survives_many_steps() {
    let split = EdgeSplit::all_train(&erdos_renyi(20, 0.25, 2));
    let mut state = ReweightState::<f64>::new(&split, 0.3);
    let s = uniform_scores(&split);
    for _ in 0..25 {
        state = reweight_step(&state, &s, 0.3).unwrap();
    }
    assert_eq!(state.tau, 25);
    assert!(state
        .adj
        .same_pattern(&ReweightState::<f64>::new(&split, 0.3).adj));
    assert!(state.adj.values().iter().all(|&w| w >= 0.0));
    for i in 0..20 {
        for j in 0..20 {
            if !split.train().contains(i, j) {
                assert_eq!(state.adj.get(i, j), None);
            }
        }
    }
}

#[test]
fn neighbor_domain_is_renormalized_full_domain() {
    let split = EdgeSplit::all_train(&Graph::from_edges(
        5,
        [(0, 1), (0, 2), (1, 2), (2, 3), (3, 4), (0, 4)],
    ));
    let h = topoconc::atc::init_embeddings::<f64>(5, 8, 21, Variance::Unit)
        .unwrap()
        .values;
    for i in 0..5 {
        let full = score_softmax(
            i,
            h.row(i),
            h.view(),
            &DotProduct,
            SoftmaxDomain::Full,
            &split,
        )
        .unwrap()
        .unwrap();
        let local = score_softmax(
            i,
            h.row(i),
            h.view(),
            &DotProduct,
            SoftmaxDomain::Neighbors,
            &split,
        )
        .unwrap()
        .unwrap();
        let nb = split.neighbors(i, SplitType::Train);
        let restricted = full.restricted_to(nb);
        let mass: f64 = restricted.iter().sum();
        for (r, l) in restricted.iter().zip(&local.values) {
            assert!((r / mass - l).abs() < 1e-12);
        }
        assert!((local.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

fn config(iterations: usize, interval: usize, warmup: usize) -> ReweightConfig {
    ReweightConfig {
        iterations,
        interval,
        warmup,
        gamma: 0.1,
        dim: 16,
        ..ReweightConfig::default()
    }
}

#[test]
fn warmup_guard_and_trace_length() {
    let split = EdgeSplit::all_train(&Graph::from_edges(3, [(0, 1), (1, 2), (2, 0)]));
    let idle = run_reweighting::<f64, _>(&split, &DotProduct, &config(4, 1, 4)).unwrap();
    assert_eq!(idle.state.adj, ReweightState::<f64>::new(&split, 0.1).adj);
    assert_eq!(
        (idle.updates, idle.state.history.len(), idle.state.tau),
        (0, 0, 4)
    );
    let once = run_reweighting::<f64, _>(&split, &DotProduct, &config(4 + 3, 3, 4)).unwrap();
    assert_eq!(once.updates, 1);
    assert_eq!(once.state.history.len(), 1);
    assert_eq!(once.state.history[0].tau, 6);
    let again = run_reweighting::<f64, _>(&split, &DotProduct, &config(7, 3, 4)).unwrap();
    assert_eq!(again.state, once.state);
}

#[test]
fn sbm_trace_rises_under_common_neighbor_scores() {
    let (g, _) = stochastic_block_model(&[100, 100], 0.1, 0.01, 4);
    let split = split_edges(
        &g,
        SplitRatios::new(0.7, 0.1, 0.2).unwrap(),
        SplitStrategy::Random { seed: 4 },
    )
    .unwrap();
    let run =
        run_reweighting::<f64, _>(&split, &CommonNeighbors::new(&split), &config(8, 1, 0)).unwrap();
    let mut last = run.initial_weighted_tc;
    for p in &run.state.history {
        assert!(
            p.mean_weighted_tc >= last - 1e-9,
            "{} after {last}",
            p.mean_weighted_tc
        );
        last = p.mean_weighted_tc;
    }
    assert!(last > run.initial_weighted_tc);
}
