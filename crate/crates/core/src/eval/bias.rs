//! Degree-related bias of ranking metrics under an untrained predictor.
//!
//! With no training signal, each of the top-`K` slots is filled by drawing
//! uniformly without replacement from the `N` candidates, so the number of
//! ground-truth hits is hypergeometric `HG(N, K, |E|)`. The closed-form
//! expectations below follow from that; [`simulate_untrained`] checks them by
//! sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Hypergeometric};

use crate::{Error, Result};

/// Candidate universe `N`, cutoff `K` and ground-truth size `|E|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BiasOracle {
    pub universe: usize,
    pub cutoff: usize,
    pub truth_size: usize,
}

impl BiasOracle {
    pub fn new(universe: usize, cutoff: usize, truth_size: usize) -> Result<Self> {
        if cutoff < 1 || cutoff > universe {
            return Err(Error::InvalidParameter(format!(
                "cutoff {cutoff} outside 1..={universe}"
            )));
        }
        if truth_size > universe {
            return Err(Error::InvalidParameter(format!(
                "truth size {truth_size} exceeds universe {universe}"
            )));
        }
        Ok(Self {
            universe,
            cutoff,
            truth_size,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasExpectation {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
    pub ndcg: f64,
    pub intersection: f64,
}

pub fn expected_metrics_untrained(o: BiasOracle) -> BiasExpectation {
    let n = o.universe as f64;
    let k = o.cutoff as f64;
    let e = o.truth_size as f64;
    if o.truth_size == 0 {
        return BiasExpectation {
            recall: 0.0,
            precision: 0.0,
            f1: 0.0,
            ndcg: 0.0,
            intersection: 0.0,
        };
    }
    BiasExpectation {
        recall: k / n,
        precision: e / n,
        f1: (2.0 * k / n) * e / (k + e),
        ndcg: e / n,
        intersection: k * e / n,
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasSimulation {
    pub oracle: BiasOracle,
    pub trials: usize,
    pub recall: Estimate,
    pub precision: Estimate,
    pub f1: Estimate,
    pub ndcg: Estimate,
    pub mrr: Estimate,
    pub hits: Estimate,
    pub intersection: Estimate,
    /// `histogram[h]` counts trials with `h` hits, `h = 0..=K`.
    pub histogram: Vec<u64>,
}

const TALLIES: usize = 7;

#[derive(Clone)]
struct Tally {
    sum: [f64; TALLIES],
    sum_sq: [f64; TALLIES],
    histogram: Vec<u64>,
}

impl Tally {
    fn new(k: usize) -> Self {
        Self {
            sum: [0.0; TALLIES],
            sum_sq: [0.0; TALLIES],
            histogram: vec![0; k + 1],
        }
    }

    fn push(&mut self, values: [f64; TALLIES], hits: usize) {
        for (i, v) in values.iter().enumerate() {
            self.sum[i] += v;
            self.sum_sq[i] += v * v;
        }
        self.histogram[hits] += 1;
    }

    fn merge(&mut self, other: &Tally) {
        for i in 0..TALLIES {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
        }
        for (a, b) in self.histogram.iter_mut().zip(&other.histogram) {
            *a += b;
        }
    }

    fn estimate(&self, i: usize, trials: usize) -> Estimate {
        let t = trials as f64;
        let mean = self.sum[i] / t;
        let var = if trials > 1 {
            ((self.sum_sq[i] - t * mean * mean) / (t - 1.0)).max(0.0)
        } else {
            0.0
        };
        Estimate {
            mean,
            stderr: (var / t).sqrt(),
        }
    }
}

/// Partial Fisher-Yates: the first `count` entries of `pool` become a
/// uniformly random ordered sample without replacement.
fn partial_shuffle<R: Rng>(rng: &mut R, pool: &mut [usize], count: usize) {
    for i in 0..count {
        let j = rng.gen_range(i..pool.len());
        pool.swap(i, j);
    }
}

fn run_trials(o: BiasOracle, trials: usize, rng: &mut ChaCha8Rng) -> Tally {
    let (n, k, e) = (o.universe, o.cutoff, o.truth_size);
    let discounts: Vec<f64> = (1..=k).map(|r| 1.0 / ((r + 1) as f64).log2()).collect();
    let ideal: f64 = discounts.iter().sum();
    let mut ranking: Vec<usize> = (0..n).collect();
    let mut truth_pool: Vec<usize> = (0..n).collect();
    let mut is_truth = vec![false; n];
    let mut tally = Tally::new(k);

    for _ in 0..trials {
        partial_shuffle(rng, &mut truth_pool, e);
        for &t in &truth_pool[..e] {
            is_truth[t] = true;
        }
        partial_shuffle(rng, &mut ranking, k);

        let mut hits = 0usize;
        let mut dcg = 0.0;
        let mut first: Option<usize> = None;
        for (pos, &c) in ranking[..k].iter().enumerate() {
            if is_truth[c] {
                hits += 1;
                dcg += discounts[pos];
                first.get_or_insert(pos + 1);
            }
        }
        for &t in &truth_pool[..e] {
            is_truth[t] = false;
        }

        let h = hits as f64;
        let recall = if e == 0 { 0.0 } else { h / e as f64 };
        let f1 = if k + e == 0 {
            0.0
        } else {
            2.0 * h / (k + e) as f64
        };
        tally.push(
            [
                recall,
                h / k as f64,
                f1,
                dcg / ideal,
                first.map_or(0.0, |r| 1.0 / r as f64),
                if hits > 0 { 1.0 } else { 0.0 },
                h,
            ],
            hits,
        );
    }
    tally
}

/// Monte-Carlo estimate of the untrained-predictor metrics.
///
/// Trials are divided across `workers` chunks; chunk `w` draws from the
/// ChaCha8 stream `w` of `seed`. Output is a function of
/// `(seed, trials, workers)` only.
pub fn simulate_untrained(
    o: BiasOracle,
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<BiasSimulation> {
    if trials < 1 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let workers = workers.clamp(1, trials);
    let base = trials / workers;
    let extra = trials % workers;
    let parts: Vec<Tally> = (0..workers)
        .into_par_iter()
        .map(|w| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(w as u64);
            run_trials(o, base + usize::from(w < extra), &mut rng)
        })
        .collect();
    let mut total = Tally::new(o.cutoff);
    for p in &parts {
        total.merge(p);
    }
    Ok(BiasSimulation {
        oracle: o,
        trials,
        recall: total.estimate(0, trials),
        precision: total.estimate(1, trials),
        f1: total.estimate(2, trials),
        ndcg: total.estimate(3, trials),
        mrr: total.estimate(4, trials),
        hits: total.estimate(5, trials),
        intersection: total.estimate(6, trials),
        histogram: total.histogram,
    })
}

/// `P(|hits| = h)` for `h = 0..=K` under `HG(N, K, |E|)`.
pub fn hypergeometric_pmf(o: BiasOracle) -> Vec<f64> {
    let dist = Hypergeometric::new(o.universe as u64, o.truth_size as u64, o.cutoff as u64)
        .expect("oracle parameters are validated");
    (0..=o.cutoff as u64).map(|h| dist.pmf(h)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Pearson goodness-of-fit of `observed` counts against `probs`.
///
/// Adjacent cells with expected count below 5 are pooled (left to right,
/// with any short tail merged into the last pooled cell).
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquareTest> {
    if observed.len() != probs.len() || observed.is_empty() {
        return Err(Error::InvalidParameter(
            "observed and expected cells differ".into(),
        ));
    }
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::UndefinedStatistic("no observations".into()));
    }
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(probs) {
        obs += o as f64;
        exp += p * total as f64;
        if exp >= 5.0 {
            cells.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 || obs > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += obs;
                last.1 += exp;
            }
            None => cells.push((obs, exp)),
        }
    }
    if cells.len() < 2 {
        return Err(Error::UndefinedStatistic(
            "fewer than two usable cells".into(),
        ));
    }
    let statistic: f64 = cells.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = cells.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::UndefinedStatistic(e.to_string()))?;
    Ok(ChiSquareTest {
        statistic,
        dof,
        p_value: 1.0 - dist.cdf(statistic),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let e = expected_metrics_untrained(BiasOracle::new(100, 10, 5).unwrap());
        assert!((e.recall - 0.1).abs() < 1e-15);
        assert!((e.precision - 0.05).abs() < 1e-15);
        assert!((e.ndcg - 0.05).abs() < 1e-15);
        assert!((e.f1 - 1.0 / 15.0).abs() < 1e-15);
        assert!((e.intersection - 0.5).abs() < 1e-15);
    }

    #[test]
    fn full_cutoff_and_empty_truth() {
        assert_eq!(
            expected_metrics_untrained(BiasOracle::new(40, 40, 3).unwrap()).recall,
            1.0
        );
        let z = expected_metrics_untrained(BiasOracle::new(40, 4, 0).unwrap());
        assert_eq!(
            [z.recall, z.precision, z.f1, z.ndcg, z.intersection],
            [0.0; 5]
        );
    }

    #[test]
    fn oracle_validation() {
        assert!(BiasOracle::new(10, 0, 1).is_err());
        assert!(BiasOracle::new(10, 11, 1).is_err());
        assert!(BiasOracle::new(10, 2, 11).is_err());
    }

    #[test]
    fn all_truth_recall_is_exact() {
        let o = BiasOracle::new(30, 7, 30).unwrap();
        let s = simulate_untrained(o, 500, 1, 3).unwrap();
        // every trial hits all K slots, so per-trial recall is exactly K/N
        assert_eq!(s.histogram[7], 500);
        assert!((s.recall.mean - 7.0 / 30.0).abs() < 1e-12);
        assert!(s.recall.stderr < 1e-9);
    }

    #[test]
    fn seeded_simulation_is_reproducible() {
        let o = BiasOracle::new(50, 5, 10).unwrap();
        let a = simulate_untrained(o, 2000, 17, 4).unwrap();
        let b = simulate_untrained(o, 2000, 17, 4).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.histogram.iter().sum::<u64>(), 2000);
    }

    #[test]
    fn pmf_sums_to_one() {
        let pmf = hypergeometric_pmf(BiasOracle::new(50, 5, 10).unwrap());
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // C(10,5)/C(50,5)
        assert!((pmf[5] - 252.0 / 2_118_760.0).abs() < 1e-15);
    }

    #[test]
    fn chi_square_rejects_wrong_model() {
        let probs = [0.25, 0.25, 0.25, 0.25];
        let fair = chi_square_gof(&[250, 250, 250, 250], &probs).unwrap();
        assert_eq!(fair.statistic, 0.0);
        assert!(fair.p_value > 0.99);
        let skewed = chi_square_gof(&[400, 200, 200, 200], &probs).unwrap();
        assert!(skewed.p_value < 1e-6);
    }
}
