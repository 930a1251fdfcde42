use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::features::{mean, std_dev};

use super::dataset::Dataset;
use super::rank::{RankList, Ranker};

/// Relative floor for zero within-class variances, so a feature that is
/// constant inside every class keeps a finite (large) coefficient.
const VARIANCE_FLOOR: f64 = 1e-9;

/// Maximum absolute discriminant coefficient over class pairs, from a
/// pooled within-class covariance shrunk toward its diagonal by `gamma`.
/// Columns are z-scored first.
pub fn ldr_coefficients(data: &Dataset, gamma: f64) -> Result<Vec<f64>> {
    data.require_classes("regularized discriminant")?;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::param(format!("shrinkage gamma must be in [0, 1], got {gamma}")));
    }
    let n = data.n_rows();
    let d = data.n_features();
    let k = data.n_classes;
    if n <= k {
        return Err(Error::param("regularized discriminant needs more rows than classes"));
    }
    let z: Vec<Vec<f64>> = data
        .cols
        .iter()
        .map(|c| {
            let (m, s) = (mean(c), std_dev(c));
            c.iter().map(|&v| if s > 0.0 { (v - m) / s } else { 0.0 }).collect()
        })
        .collect();
    let counts = data.class_counts();
    let mut means = DMatrix::<f64>::zeros(k, d);
    for (f, col) in z.iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            means[(data.y[i], f)] += v / counts[data.y[i]] as f64;
        }
    }
    let mut s = DMatrix::<f64>::zeros(d, d);
    let mut centered = vec![0.0; d];
    for i in 0..n {
        for f in 0..d {
            centered[f] = z[f][i] - means[(data.y[i], f)];
        }
        for a in 0..d {
            if centered[a] == 0.0 {
                continue;
            }
            for b in a..d {
                s[(a, b)] += centered[a] * centered[b];
            }
        }
    }
    let dof = (n - k) as f64;
    for a in 0..d {
        for b in a..d {
            let v = s[(a, b)] / dof * if a == b { 1.0 } else { 1.0 - gamma };
            s[(a, b)] = v;
            s[(b, a)] = v;
        }
    }
    let mean_diag = (0..d).map(|a| s[(a, a)]).sum::<f64>() / d as f64;
    let floor = VARIANCE_FLOOR * mean_diag.max(1.0);
    for a in 0..d {
        if s[(a, a)] < floor {
            s[(a, a)] = floor;
        }
    }
    let singular =
        || Error::Numerical("shrunk covariance is singular (collinear features); use a shrinkage gamma > 0".into());
    let diag: Vec<f64> = (0..d).map(|a| s[(a, a)]).collect();
    let chol = s.cholesky().ok_or_else(singular)?;
    // Rounding can leave a tiny positive pivot on an exactly singular matrix.
    let l = chol.l_dirty();
    if (0..d).any(|a| l[(a, a)].powi(2) < 1e-10 * diag[a]) {
        return Err(singular());
    }
    let mut coef = vec![0.0f64; d];
    for a in 0..k {
        for b in a + 1..k {
            if counts[a] == 0 || counts[b] == 0 {
                continue;
            }
            let diff = DVector::from_iterator(d, (0..d).map(|f| means[(a, f)] - means[(b, f)]));
            let w = chol.solve(&diff);
            for (c, wv) in coef.iter_mut().zip(w.iter()) {
                *c = c.max(wv.abs());
            }
        }
    }
    Ok(coef)
}

pub fn ldr_importance(data: &Dataset, gamma: f64) -> Result<RankList> {
    Ok(RankList::from_scores(Ranker::Ldr, ldr_coefficients(data, gamma)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;
    use rand_distr::{Distribution, StandardNormal};

    fn zscore(c: &[f64]) -> Vec<f64> {
        let (m, s) = (mean(c), std_dev(c));
        c.iter().map(|v| (v - m) / s).collect()
    }

    /// Two classes sharing a ±1 factorial design, class 1 shifted along
    /// feature 1. The within-class covariance is diagonal, so the
    /// discriminant is Δμ / within-variance on feature 1 and 0 elsewhere.
    #[test]
    fn separation_along_one_axis() {
        let mut cols = vec![Vec::new(); 3];
        let mut y = Vec::new();
        for class in 0..2 {
            for code in 0..8 {
                for (f, col) in cols.iter_mut().enumerate() {
                    let v = if (code >> f) & 1 == 1 { 1.0 } else { -1.0 };
                    col.push(v + if f == 1 { 3.0 * class as f64 } else { 0.0 });
                }
                y.push(class);
            }
        }
        let z1 = zscore(&cols[1]);
        let mu0 = z1[..8].iter().sum::<f64>() / 8.0;
        let mu1 = z1[8..].iter().sum::<f64>() / 8.0;
        let within: f64 = z1[..8].iter().map(|v| (v - mu0).powi(2)).sum::<f64>()
            + z1[8..].iter().map(|v| (v - mu1).powi(2)).sum::<f64>();
        let expected = (mu0 - mu1).abs() / (within / 14.0);
        let d = Dataset::new(cols, &y).unwrap();
        for gamma in [0.0, 0.5, 1.0] {
            let c = ldr_coefficients(&d, gamma).unwrap();
            assert!((c[1] - expected).abs() < 1e-12);
            assert!(c[0].abs() < 1e-12 && c[2].abs() < 1e-12);
        }
        assert_eq!(ldr_importance(&d, 0.5).unwrap().order[0], 1);
    }

    #[test]
    fn diagonal_limit_is_mean_difference_over_variance() {
        let mut rng = rng_for(3, &[]);
        let n = 40;
        let y: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let base: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let cols: Vec<Vec<f64>> = (0..3)
            .map(|f| {
                (0..n)
                    .map(|i| {
                        let e: f64 = StandardNormal.sample(&mut rng);
                        base[i] + e + y[i] as f64 * f as f64
                    })
                    .collect()
            })
            .collect();
        let d = Dataset::new(cols.clone(), &y).unwrap();
        let c = ldr_coefficients(&d, 1.0).unwrap();
        for f in 0..3 {
            let z = zscore(&cols[f]);
            let g0: Vec<f64> = (0..n).filter(|&i| y[i] == 0).map(|i| z[i]).collect();
            let g1: Vec<f64> = (0..n).filter(|&i| y[i] == 1).map(|i| z[i]).collect();
            let (m0, m1) = (mean(&g0), mean(&g1));
            let ss: f64 =
                g0.iter().map(|v| (v - m0).powi(2)).sum::<f64>() + g1.iter().map(|v| (v - m1).powi(2)).sum::<f64>();
            assert!((c[f] - (m0 - m1).abs() / (ss / (n - 2) as f64)).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_class_means_rank_last() {
        let y = [0, 0, 0, 0, 1, 1, 1, 1];
        let same = vec![1.0, 2.0, 3.0, 4.0, 4.0, 3.0, 2.0, 1.0];
        let sep = vec![0.0, 0.5, 0.2, 0.1, 2.0, 2.4, 2.2, 2.1];
        let d = Dataset::new(vec![same, sep], &y).unwrap();
        let c = ldr_coefficients(&d, 1.0).unwrap();
        assert!(c[0].abs() < 1e-12);
        assert_eq!(ldr_importance(&d, 1.0).unwrap().order, vec![1, 0]);
    }

    #[test]
    fn collinear_without_shrinkage_is_an_error() {
        let y = [0, 0, 0, 1, 1, 1];
        let a = vec![1.0, 2.0, 4.0, 3.0, 5.0, 8.0];
        let b: Vec<f64> = a.iter().map(|v| 2.0 * v + 1.0).collect();
        let d = Dataset::new(vec![a, b], &y).unwrap();
        assert!(matches!(ldr_coefficients(&d, 0.0), Err(Error::Numerical(_))));
        assert!(ldr_coefficients(&d, 0.5).is_ok());
    }
}
