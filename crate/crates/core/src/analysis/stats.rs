use serde::Serialize;

use crate::{Error, Result};

/// A correlation computed over pairwise-complete entries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PairedStatistic {
    pub value: f64,
    pub used: usize,
    pub excluded: usize,
}

/// Pearson correlation. Symmetric in its arguments bit for bit.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::UndefinedStatistic(format!(
            "pearson needs at least 2 pairs, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxx += da * da;
        syy += db * db;
        sxy += da * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedStatistic("zero variance".into()));
    }
    // Product of square roots, not the square root of the product, keeps the
    // two argument orders identical.
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

fn complete_pairs(x: &[Option<f64>], y: &[Option<f64>]) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (u, v) in x.iter().zip(y) {
        if let (Some(u), Some(v)) = (u, v) {
            a.push(*u);
            b.push(*v);
        }
    }
    let excluded = x.len() - a.len();
    Ok((a, b, excluded))
}

pub fn pearson_pairwise(x: &[Option<f64>], y: &[Option<f64>]) -> Result<PairedStatistic> {
    let (a, b, excluded) = complete_pairs(x, y)?;
    Ok(PairedStatistic {
        value: pearson(&a, &b)?,
        used: a.len(),
        excluded,
    })
}

/// 1-based ranks with ties sharing their average rank.
fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        let r = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = r;
        }
        start = end;
    }
    ranks
}

/// Spearman rank correlation (Pearson over average ranks).
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

pub fn spearman_pairwise(x: &[Option<f64>], y: &[Option<f64>]) -> Result<PairedStatistic> {
    let (a, b, excluded) = complete_pairs(x, y)?;
    Ok(PairedStatistic {
        value: spearman(&a, &b)?,
        used: a.len(),
        excluded,
    })
}

/// Linearly interpolated quantile of already sorted data.
pub fn quantile(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::UndefinedStatistic("quantile of empty data".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("quantile level {p}")));
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_values() {
        assert!(
            (pearson(&[1.0, 2.0, 3.0, 4.0], &[2.0, 1.0, 4.0, 3.0]).unwrap() - 0.6).abs() < 1e-15
        );
        let x = [0.3, 1.7, 2.2, 5.0];
        let affine: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert_eq!(pearson(&x, &affine).unwrap(), 1.0);
        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(pearson(&x, &neg).unwrap(), -1.0);
    }

    #[test]
    fn zero_variance_is_undefined() {
        assert!(matches!(
            pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]),
            Err(Error::UndefinedStatistic(_))
        ));
        assert!(pearson(&[1.0], &[2.0]).is_err());
    }

    #[test]
    fn pairwise_exclusion_counts() {
        let x = [Some(1.0), None, Some(2.0), Some(3.0), Some(4.0)];
        let y = [Some(2.0), Some(9.0), Some(1.0), None, Some(3.0)];
        let s = pearson_pairwise(&x, &y).unwrap();
        assert_eq!((s.used, s.excluded), (3, 2));
        assert_eq!(
            s.value,
            pearson(&[1.0, 2.0, 4.0], &[2.0, 1.0, 3.0]).unwrap()
        );
    }

    #[test]
    fn ranks_average_ties() {
        assert_eq!(
            average_ranks(&[3.0, 1.0, 3.0, 2.0]),
            vec![3.5, 1.0, 3.5, 2.0]
        );
        let r = spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 4.0, 9.0, 16.0]).unwrap();
        assert!((r - 1.0).abs() < 1e-15);
    }

    #[test]
    fn interpolated_quantiles() {
        let s = [0.1, 0.3];
        assert!((quantile(&s, 0.5).unwrap() - 0.2).abs() < 1e-15);
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.25).unwrap(), 2.0);
        assert!(quantile(&[], 0.5).is_err());
    }
}
