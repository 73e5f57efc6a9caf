//! Scalar summaries of episode returns.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean return over the focal slots.
pub fn focal_per_capita(returns: &[f64], focal: &[usize]) -> Result<f64> {
    if focal.is_empty() {
        return Err(Error::contract("focal set is empty"));
    }
    let mut sum = 0.0;
    for &i in focal {
        sum += *returns
            .get(i)
            .ok_or_else(|| Error::contract(format!("focal slot {i} out of range")))?;
    }
    Ok(sum / focal.len() as f64)
}

/// Gini coefficient Σᵢ Σⱼ |xᵢ − xⱼ| / (2 n² μ).
///
/// Negative inputs are shifted so the smallest value is 0; a zero mean
/// gives 0.
pub fn gini(returns: &[f64]) -> f64 {
    let n = returns.len();
    if n == 0 {
        return 0.0;
    }
    let lo = returns.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = if lo < 0.0 { -lo } else { 0.0 };
    let xs: Vec<f64> = returns.iter().map(|x| x + shift).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    if mean <= 0.0 {
        return 0.0;
    }
    let mut diff = 0.0;
    for a in &xs {
        for b in &xs {
            diff += (a - b).abs();
        }
    }
    (diff / (2.0 * (n * n) as f64 * mean)).clamp(0.0, 1.0)
}

/// Alternative inequality measure: max − min.
pub fn spread(returns: &[f64]) -> f64 {
    let hi = returns.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = returns.iter().copied().fold(f64::INFINITY, f64::min);
    if returns.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Inequality {
    #[default]
    Gini,
    Spread,
}

impl Inequality {
    pub fn measure(self, returns: &[f64]) -> f64 {
        match self {
            Inequality::Gini => gini(returns),
            Inequality::Spread => spread(returns),
        }
    }
}

/// Min-max normalises each column of an agents × scenarios table. A
/// column whose values are all equal maps to 0.
pub fn normalize_scores(raw: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let cols = raw.first().map_or(0, Vec::len);
    let mut out = vec![vec![0.0; cols]; raw.len()];
    for c in 0..cols {
        let lo = raw.iter().map(|r| r[c]).fold(f64::INFINITY, f64::min);
        let hi = raw.iter().map(|r| r[c]).fold(f64::NEG_INFINITY, f64::max);
        if hi > lo {
            for (r, row) in raw.iter().enumerate() {
                out[r][c] = ((row[c] - lo) / (hi - lo)).clamp(0.0, 1.0);
            }
        }
    }
    out
}

/// Unweighted mean of a substrate's normalised scenario scores.
pub fn aggregate_substrate_score(scores: &[f64]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::contract("no scenario scores to aggregate"));
    }
    Ok(scores.iter().sum::<f64>() / scores.len() as f64)
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Standard error of the mean; 0 for fewer than two samples.
pub(crate) fn stderr(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 2 {
        return 0.0;
    }
    let m = mean(xs);
    let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64;
    (var / n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn focal_mean() {
        assert_eq!(focal_per_capita(&[2.0, 4.0, 10.0], &[0, 1]).unwrap(), 3.0);
        assert_eq!(focal_per_capita(&[7.0], &[0]).unwrap(), 7.0);
        assert!(focal_per_capita(&[1.0], &[]).is_err());
    }

    #[test]
    fn gini_cases() {
        assert_eq!(gini(&[1.0, 1.0, 1.0]), 0.0);
        assert_eq!(gini(&[0.0, 1.0]), 0.5);
        assert_eq!(gini(&[0.0, 0.0, 0.0]), 0.0);
        assert_eq!(gini(&[-1.0, 0.0]), 0.5);
    }

    #[test]
    fn normalization() {
        let n = normalize_scores(&[vec![0.0, 3.0], vec![5.0, 3.0], vec![10.0, 3.0]]);
        assert_eq!(n[1][0], 0.5);
        assert_eq!(n[2][0], 1.0);
        assert_eq!(n[0][0], 0.0);
        assert!(n.iter().all(|r| r[1] == 0.0));
    }

    #[test]
    fn aggregation() {
        assert!((aggregate_substrate_score(&[0.2, 0.4, 0.6]).unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(aggregate_substrate_score(&[0.7]).unwrap(), 0.7);
    }
}
