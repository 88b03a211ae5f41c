mod support;

use topoconc::analysis::spearman_pairwise;
use topoconc::atc::{atc, atc_all, default_alpha, diffuse, init_embeddings, Similarity, Variance};
use topoconc::concentration::{tc_all, NormMode, TcParams};
use topoconc::eval::diffusion_predictor;
use topoconc::graph::{
    erdos_renyi, normalize, split_edges, stochastic_block_model, EdgeSplit, Graph,
    NormalizationMode, SplitRatios, SplitStrategy, SplitType,
};
use topoconc::reweight::neighborhood_embeddings;

#[test]
fn sparse_diffusion_matches_dense_oracle() {
    for (seed, n) in [(1u64, 12usize), (2, 40), (3, 64)] {
        let split = EdgeSplit::all_train(&erdos_renyi(n, 0.15, seed));
        let train = support::adjacency_lists(&split, SplitType::Train);
        let raw = init_embeddings::<f64>(n, 16, seed, Variance::Unit).unwrap();
        let alpha = default_alpha(3, 0.5);
        let got = diffuse(&normalize(&split, NormalizationMode::Row), &raw, &alpha).unwrap();
        let rows: Vec<Vec<f64>> = raw.values.rows().into_iter().map(|r| r.to_vec()).collect();
        let want = support::dense_diffusion(&train, &rows, &alpha);
        for i in 0..n {
            for c in 0..16 {
                assert!((got.values[[i, c]] - want[i][c]).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn neighborhood_average_matches_dense_oracle() {
    let split = EdgeSplit::all_train(&erdos_renyi(10, 0.3, 4));
    let train = support::adjacency_lists(&split, SplitType::Train);
    let h = init_embeddings::<f64>(10, 6, 4, Variance::Unit).unwrap();
    let adj = normalize::<f64>(&split, NormalizationMode::Row);
    let got = neighborhood_embeddings(&adj.matrix, h.values.view()).unwrap();
    let rows: Vec<Vec<f64>> = h.values.rows().into_iter().map(|r| r.to_vec()).collect();
    let want = support::dense_diffusion(&train, &rows, &[1.0]);
    for i in 0..10 {
        for c in 0..6 {
            assert!((got[[i, c]] - want[i][c]).abs() < 1e-12);
        }
    }
    // star center averages its leaves
    let star = EdgeSplit::all_train(&Graph::from_edges(4, [(0, 1), (0, 2), (0, 3)]));
    let adj = normalize::<f64>(&star, NormalizationMode::Row);
    let h = init_embeddings::<f64>(4, 3, 1, Variance::Unit).unwrap();
    let n = neighborhood_embeddings(&adj.matrix, h.values.view()).unwrap();
    for c in 0..3 {
        let mean = (h.values[[1, c]] + h.values[[2, c]] + h.values[[3, c]]) / 3.0;
        assert!((n[[0, c]] - mean).abs() < 1e-15);
    }
    assert!(neighborhood_embeddings(&adj.matrix, h.values.slice(ndarray::s![..3, ..])).is_err());
}

#[test]
fn triangle_dot_atc_tracks_dimension_times_concentration() {
    let split = EdgeSplit::all_train(&Graph::from_edges(3, [(0, 1), (1, 2), (2, 0)]));
    let adj = normalize::<f64>(&split, NormalizationMode::Row);
    let seeds = 2000;
    let mut sum = 0.0;
    for seed in 0..seeds {
        let raw = init_embeddings::<f64>(3, 64, seed, Variance::Unit).unwrap();
        let n = diffuse(&adj, &raw, &[1.0]).unwrap();
        sum += atc(&n, &split, 0, SplitType::Train, Similarity::Dot)
            .unwrap()
            .unwrap();
    }
    let mean = sum / seeds as f64;
    assert!((mean - 16.0).abs() < 0.8, "mean {mean}");
}

#[test]
fn diffusion_scores_reward_shared_neighbors() {
    let split = EdgeSplit::all_train(&Graph::from_edges(3, [(0, 1), (1, 2), (2, 0)]));
    let adj = normalize::<f64>(&split, NormalizationMode::Row);
    let mut sum = 0.0;
    for seed in 0..500 {
        let raw = init_embeddings::<f64>(3, 32, seed, Variance::PerDimension).unwrap();
        let n = diffuse(&adj, &raw, &[1.0]).unwrap();
        let p = diffusion_predictor(&n);
        assert_eq!(p.score(0, 1), p.score(1, 0));
        sum += p.score(0, 1);
    }
    assert!(sum / 500.0 > 0.0);
}

#[test]
fn cosine_atc_ranks_like_exact_concentration() {
    let (g, _) = stochastic_block_model(&[125; 4], 0.1, 0.01, 11);
    let split = split_edges(
        &g,
        SplitRatios::new(0.7, 0.1, 0.2).unwrap(),
        SplitStrategy::Random { seed: 11 },
    )
    .unwrap();
    let exact: Vec<Option<f64>> = tc_all::<f64>(
        &split,
        SplitType::Train,
        TcParams::new(1, 0.5, NormMode::Product).unwrap(),
    )
    .unwrap()
    .into_iter()
    .map(|r| r.value)
    .collect();
    let raw = init_embeddings::<f64>(g.node_count(), 256, 11, Variance::PerDimension).unwrap();
    let n = diffuse(&normalize(&split, NormalizationMode::Row), &raw, &[1.0]).unwrap();
    let approx = atc_all(&n, &split, SplitType::Train, Similarity::Cosine).unwrap();
    let rho = spearman_pairwise(&exact, &approx).unwrap();
    assert!(rho.value > 0.5, "spearman {}", rho.value);
}

#[test]
fn f32_embeddings_round_f64_draws() {
    let a = init_embeddings::<f64>(5, 7, 3, Variance::Unit).unwrap();
    let b = init_embeddings::<f32>(5, 7, 3, Variance::Unit).unwrap();
    for (x, y) in a.values.iter().zip(b.values.iter()) {
        assert_eq!(*x as f32, *y);
    }
}
