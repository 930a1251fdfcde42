use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Average ranks (1-based) with ties sharing the mean rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

fn tie_sizes(values: &[f64]) -> Vec<usize> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut i = 0;
    while i < v.len() {
        let mut j = i + 1;
        while j < v.len() && v[j] == v[i] {
            j += 1;
        }
        out.push(j - i);
        i = j;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Friedman chi-square over a participants × models table with the tie
/// correction; p from chi-square with models − 1 degrees of freedom.
pub fn friedman_test(scores: &[Vec<f64>]) -> Result<TestResult> {
    let n = scores.len();
    let k = scores.first().map_or(0, Vec::len);
    if n < 2 || k < 2 || scores.iter().any(|r| r.len() != k) {
        return Err(Error::param(
            "Friedman test needs at least 2 participants and 2 models in a full table",
        ));
    }
    let mut rank_sums = vec![0.0; k];
    let mut tie_term = 0.0;
    for row in scores {
        for (s, r) in rank_sums.iter_mut().zip(average_ranks(row)) {
            *s += r;
        }
        tie_term += tie_sizes(row).iter().map(|&t| (t * t * t - t) as f64).sum::<f64>();
    }
    let (nf, kf) = (n as f64, k as f64);
    let denom = 1.0 - tie_term / (nf * (kf * kf * kf - kf));
    if denom <= 1e-12 {
        return Ok(TestResult {
            statistic: 0.0,
            p_value: 1.0,
        });
    }
    let q =
        (12.0 / (nf * kf * (kf + 1.0)) * rank_sums.iter().map(|r| r * r).sum::<f64>() - 3.0 * nf * (kf + 1.0)) / denom;
    let q = q.max(0.0);
    let p = ChiSquared::new(kf - 1.0).expect("df ≥ 1").sf(q);
    Ok(TestResult {
        statistic: q,
        p_value: p.min(1.0),
    })
}

/// Largest sample size using the exact null distribution.
pub const WILCOXON_EXACT_MAX: usize = 25;

/// Two-sided Wilcoxon signed-rank p-value on paired samples, multiplied by
/// `corrections` and capped at 1. Zero differences are dropped; the exact
/// null distribution (ties handled on doubled ranks) is used up to
/// [`WILCOXON_EXACT_MAX`] pairs, the normal approximation with continuity
/// and tie corrections beyond.
pub fn wilcoxon_signed_rank(a: &[f64], b: &[f64], corrections: usize) -> Result<TestResult> {
    if a.len() != b.len() {
        return Err(Error::param("Wilcoxon test needs paired samples of equal length"));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).filter(|v| *v != 0.0).collect();
    let n = d.len();
    if n == 0 {
        return Ok(TestResult {
            statistic: 0.0,
            p_value: 1.0,
        });
    }
    let abs: Vec<f64> = d.iter().map(|v| v.abs()).collect();
    let ranks = average_ranks(&abs);
    let w_plus: f64 = d.iter().zip(&ranks).filter(|(v, _)| **v > 0.0).map(|(_, r)| r).sum();
    let raw = if n <= WILCOXON_EXACT_MAX {
        let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
        let total: usize = doubled.iter().sum();
        // counts[s] = number of sign assignments with doubled W+ equal to s
        let mut counts = vec![0.0f64; total + 1];
        counts[0] = 1.0;
        for &r in &doubled {
            for s in (r..=total).rev() {
                counts[s] += counts[s - r];
            }
        }
        let all = 2f64.powi(n as i32);
        let w2 = (2.0 * w_plus).round() as usize;
        let lower: f64 = counts[..=w2].iter().sum::<f64>() / all;
        let upper: f64 = counts[w2..].iter().sum::<f64>() / all;
        (2.0 * lower.min(upper)).min(1.0)
    } else {
        let nf = n as f64;
        let mean = nf * (nf + 1.0) / 4.0;
        let ties: f64 = tie_sizes(&abs).iter().map(|&t| (t * t * t - t) as f64).sum();
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - ties / 48.0;
        let z = ((w_plus - mean).abs() - 0.5).max(0.0) / var.sqrt();
        (2.0 * Normal::standard().sf(z)).min(1.0)
    };
    Ok(TestResult {
        statistic: w_plus,
        p_value: (raw * corrections.max(1) as f64).min(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn friedman_worked_example() {
        let rows = vec![
            vec![1.0, 2.0, 3.0],
            vec![1.0, 3.0, 2.0],
            vec![1.0, 2.0, 3.0],
            vec![2.0, 1.0, 3.0],
        ];
        let r = friedman_test(&rows).unwrap();
        // Rank sums 5, 8, 11: 12/(4·3·4)·210 − 3·4·4 = 4.5; df 2 → p = e^(−2.25).
        assert!((r.statistic - 4.5).abs() < 1e-12);
        assert!((r.p_value - (-2.25f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn friedman_edge_cases() {
        let same = vec![vec![0.7, 0.7]; 6];
        assert_eq!(
            friedman_test(&same).unwrap(),
            TestResult {
                statistic: 0.0,
                p_value: 1.0
            }
        );
        let dom: Vec<Vec<f64>> = (0..24).map(|i| vec![0.5 + i as f64 * 0.01, 0.9]).collect();
        let r = friedman_test(&dom).unwrap();
        assert!((r.statistic - 24.0).abs() < 1e-12);
        assert!(r.p_value < 1e-5);
        assert!(friedman_test(&[vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn wilcoxon_small_cases() {
        let a = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let b: Vec<f64> = a.iter().map(|v| v - 0.5 - v * 0.1).collect();
        let r = wilcoxon_signed_rank(&a, &b, 1).unwrap();
        assert_eq!(r.p_value, 0.03125);
        assert_eq!(wilcoxon_signed_rank(&a, &b, 3).unwrap().p_value, 0.09375);
        assert_eq!(wilcoxon_signed_rank(&a, &b, 40).unwrap().p_value, 1.0);
        assert_eq!(wilcoxon_signed_rank(&a, &a, 1).unwrap().p_value, 1.0);
        assert!(wilcoxon_signed_rank(&a, &b[..3], 1).is_err());
    }

    #[test]
    fn normal_branch_agrees_with_exact_near_the_boundary() {
        let a: Vec<f64> = (0..26).map(|i| (i as f64 * 0.37).sin()).collect();
        let b: Vec<f64> = (0..26)
            .map(|i| (i as f64 * 0.37).sin() + 0.2 * (i as f64 * 1.3).cos() - 0.05)
            .collect();
        let approx = wilcoxon_signed_rank(&a, &b, 1).unwrap().p_value;
        let exact = wilcoxon_signed_rank(&a[..25], &b[..25], 1).unwrap().p_value;
        assert!((approx - exact).abs() < 0.1, "{approx} vs {exact}");
    }
}
