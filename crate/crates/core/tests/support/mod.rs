//! Independent reference implementations shared by the integration and
//! acceptance tests: explicit hop sets over `BTreeSet`s, concentration in
//! exact rational arithmetic, and dense diffusion.

#![allow(dead_code)]

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use topoconc::concentration::NormMode;
use topoconc::graph::{EdgeSplit, SplitType};

pub type Adjacency = Vec<BTreeSet<usize>>;

pub fn adjacency_lists(split: &EdgeSplit, t: SplitType) -> Adjacency {
    let mut adj = vec![BTreeSet::new(); split.node_count()];
    for e in split.edges(t) {
        adj[e.u].insert(e.v);
        adj[e.v].insert(e.u);
    }
    adj
}

/// `H^k` for k = 1..=k: nodes ending some length-k walk from `i`, minus `i`.
pub fn hop_sets(train: &Adjacency, i: usize, k: usize) -> Vec<BTreeSet<usize>> {
    let mut frontier: BTreeSet<usize> = [i].into();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        frontier = frontier
            .iter()
            .flat_map(|&u| train[u].iter().copied())
            .collect();
        let mut h = frontier.clone();
        h.remove(&i);
        out.push(h);
    }
    out
}

fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn count(n: usize) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn norm(mode: NormMode, a: usize, b: usize) -> usize {
    match mode {
        NormMode::Product => a * b,
        NormMode::Source => a,
        NormMode::Min => a.min(b),
    }
}

/// Exact concentration with `beta = beta_num / beta_den`.
pub fn tc_exact(
    train: &Adjacency,
    typed: &Adjacency,
    i: usize,
    k: usize,
    beta: (i64, i64),
    mode: NormMode,
) -> Option<BigRational> {
    if typed[i].is_empty() {
        return None;
    }
    let beta = rational(beta.0, beta.1);
    let weight = |p: usize| -> BigRational {
        let mut w = BigRational::one();
        for _ in 0..p {
            w *= &beta;
        }
        w
    };
    let hi = hop_sets(train, i, k);
    let mut total = BigRational::zero();
    let mut used = 0usize;
    for &j in &typed[i] {
        let hj = hop_sets(train, j, k);
        let (mut num, mut den) = (BigRational::zero(), BigRational::zero());
        for (k1, a) in hi.iter().enumerate() {
            for (k2, b) in hj.iter().enumerate() {
                let g = norm(mode, a.len(), b.len());
                if g == 0 {
                    continue;
                }
                let w = weight(k1 + k2);
                num += &w * count(a.intersection(b).count());
                den += &w * count(g);
            }
        }
        if !den.is_zero() {
            total += num / den;
            used += 1;
        }
    }
    Some(if used == 0 {
        BigRational::zero()
    } else {
        total / count(used)
    })
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().expect("finite rational")
}

/// `Σ_k α_k Ã^k R` with a dense row-normalized `Ã`.
pub fn dense_diffusion(train: &Adjacency, raw: &[Vec<f64>], alpha: &[f64]) -> Vec<Vec<f64>> {
    let n = train.len();
    let d = raw.first().map_or(0, Vec::len);
    let mut a = vec![vec![0.0; n]; n];
    for (i, nb) in train.iter().enumerate() {
        for &j in nb {
            a[i][j] = 1.0 / nb.len() as f64;
        }
    }
    let mut power = raw.to_vec();
    let mut acc = vec![vec![0.0; d]; n];
    for &w in alpha {
        let mut next = vec![vec![0.0; d]; n];
        for i in 0..n {
            for l in 0..n {
                if a[i][l] != 0.0 {
                    for c in 0..d {
                        next[i][c] += a[i][l] * power[l][c];
                    }
                }
            }
        }
        power = next;
        for i in 0..n {
            for c in 0..d {
                acc[i][c] += w * power[i][c];
            }
        }
    }
    acc
}

/// Exact fraction of the betas the oracle supports.
pub fn beta_fraction(beta: f64) -> (i64, i64) {
    match beta {
        b if b == 1.0 => (1, 1),
        b if b == 0.5 => (1, 2),
        b if b == 0.25 => (1, 4),
        _ => panic!("oracle supports beta in {{1, 0.5, 0.25}}"),
    }
}
