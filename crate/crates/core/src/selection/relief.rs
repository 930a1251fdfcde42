use crate::error::Result;

use super::dataset::Dataset;
use super::rank::{RankList, Ranker};

/// Relief-F weights: every row is an instance, `k` nearest hits and `k`
/// nearest misses per other class, misses weighted by class prior. Feature
/// differences are range-normalized and neighbours are found with the
/// summed (Manhattan) difference. Distance ties go to the lower row index.
pub fn relief_f_weights(data: &Dataset, k: usize) -> Result<Vec<f64>> {
    data.require_classes("Relief-F")?;
    let n = data.n_rows();
    let d = data.n_features();
    let scaled: Vec<Vec<f64>> = data
        .cols
        .iter()
        .map(|c| {
            let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let range = hi - lo;
            c.iter()
                .map(|&v| if range > 0.0 { (v - lo) / range } else { 0.0 })
                .collect()
        })
        .collect();
    let counts = data.class_counts();
    let prior: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
    for (c, &size) in counts.iter().enumerate() {
        if size > 0 && size < k + 1 {
            log::warn!(
                "Relief-F: class {c} has {size} rows, nearest-hit count truncated to {}",
                size - 1
            );
        }
    }
    let mut weights = vec![0.0; d];
    let mut dist = vec![0.0; n];
    for i in 0..n {
        for (j, dj) in dist.iter_mut().enumerate() {
            *dj = if j == i {
                f64::INFINITY
            } else {
                scaled.iter().map(|col| (col[i] - col[j]).abs()).sum()
            };
        }
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); data.n_classes];
        for j in (0..n).filter(|&j| j != i) {
            by_class[data.y[j]].push(j);
        }
        let yi = data.y[i];
        for (c, members) in by_class.iter_mut().enumerate() {
            if members.is_empty() {
                continue;
            }
            members.sort_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(a.cmp(&b)));
            let kk = k.min(members.len());
            let scale = if c == yi {
                -1.0 / (n * kk) as f64
            } else {
                prior[c] / (1.0 - prior[yi]) / (n * kk) as f64
            };
            for &j in &members[..kk] {
                for (w, col) in weights.iter_mut().zip(&scaled) {
                    *w += scale * (col[i] - col[j]).abs();
                }
            }
        }
    }
    Ok(weights)
}

pub fn relief_f(data: &Dataset, k: usize) -> Result<RankList> {
    Ok(RankList::from_scores(Ranker::ReliefF, relief_f_weights(data, k)?))
}
