use crate::error::Result;

use super::dataset::Dataset;
use super::rank::{RankList, Ranker};

/// Equal-frequency discretization into at most `bins` bins; tied values
/// share the bin of their first sorted position.
pub fn equal_frequency_bins(x: &[f64], bins: usize) -> Vec<usize> {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut out = vec![0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        let bin = start * bins / n;
        for &i in &idx[start..end] {
            out[i] = bin;
        }
        start = end;
    }
    out
}

/// Mutual information in nats between two discrete codes.
pub fn mutual_information(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut joint = vec![0usize; ka * kb];
    let mut pa = vec![0usize; ka];
    let mut pb = vec![0usize; kb];
    for (&x, &y) in a.iter().zip(b) {
        joint[x * kb + y] += 1;
        pa[x] += 1;
        pb[y] += 1;
    }
    let mut mi = 0.0;
    for x in 0..ka {
        for y in 0..kb {
            let c = joint[x * kb + y];
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (pa[x] as f64 * pb[y] as f64)).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Greedy forward selection maximising relevance minus mean redundancy.
pub fn mrmr(data: &Dataset, bins: usize) -> Result<RankList> {
    data.require_classes("MRMR")?;
    let codes: Vec<Vec<usize>> = data.cols.iter().map(|c| equal_frequency_bins(c, bins)).collect();
    let d = codes.len();
    let relevance: Vec<f64> = codes.iter().map(|c| mutual_information(c, &data.y)).collect();
    let mut redundancy_sum = vec![0.0; d];
    let mut chosen = vec![false; d];
    let mut order = Vec::with_capacity(d);
    let mut scores = vec![0.0; d];
    for step in 0..d {
        let mut best: Option<(usize, f64)> = None;
        for f in (0..d).filter(|&f| !chosen[f]) {
            let score = if step == 0 {
                relevance[f]
            } else {
                relevance[f] - redundancy_sum[f] / step as f64
            };
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((f, score));
            }
        }
        let (f, score) = best.expect("unchosen feature remains");
        chosen[f] = true;
        order.push(f);
        scores[f] = score;
        for g in (0..d).filter(|&g| !chosen[g]) {
            redundancy_sum[g] += mutual_information(&codes[f], &codes[g]);
        }
    }
    Ok(RankList {
        algorithm: Ranker::Mrmr,
        order,
        scores: Some(scores),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_are_balanced_and_respect_ties() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let b = equal_frequency_bins(&x, 10);
        assert_eq!(b, (0..20).map(|i| i / 2).collect::<Vec<_>>());
        let t = equal_frequency_bins(&[1.0, 1.0, 1.0, 2.0], 2);
        assert_eq!(t, vec![0, 0, 0, 1]);
        assert_eq!(equal_frequency_bins(&[4.0; 5], 10), vec![0; 5]);
    }

    #[test]
    fn mutual_information_matches_entropy_cases() {
        let y = [0, 0, 1, 1];
        assert!((mutual_information(&y, &y) - 2f64.ln()).abs() < 1e-15);
        assert_eq!(mutual_information(&[0, 1, 0, 1], &y), 0.0);
    }

    /// f0 informative, f1 an exact copy of f0, f2 partly informative.
    fn toy() -> Dataset {
        let y = [0, 0, 0, 0, 1, 1, 1, 1];
        let f0: Vec<f64> = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        let f2 = vec![1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 2.0, 1.0];
        Dataset::new(vec![f0.clone(), f0, f2], &y).unwrap()
    }

    #[test]
    fn duplicate_of_first_pick_is_ranked_last() {
        // With 2 bins: f0 and f1 both code the class exactly (MI = ln 2);
        // f2 codes it with 2 errors in 8. After picking f0, f1 scores
        // ln 2 − ln 2 = 0 while f2 scores MI(f2; y) − MI(f2; f0) = 0, a tie
        // resolved by column index. Direct evaluation below.
        let d = toy();
        let codes: Vec<Vec<usize>> = d.cols.iter().map(|c| equal_frequency_bins(c, 2)).collect();
        let rel2 = mutual_information(&codes[2], &d.y);
        let red2 = mutual_information(&codes[2], &codes[0]);
        let r = mrmr(&d, 2).unwrap();
        assert_eq!(r.order[0], 0);
        let s = r.scores.unwrap();
        assert!((s[2] - (rel2 - red2)).abs() < 1e-15);
        assert!(s[1].abs() < 1e-15);
        // With 10 bins f2's redundancy with f0 stays below its relevance
        // surplus, so the duplicate falls to the end.
        let r10 = mrmr(&d, 10).unwrap();
        assert_eq!(r10.order, vec![0, 2, 1]);
    }

    #[test]
    fn noise_ranks_below_signal() {
        let y: Vec<usize> = (0..60).map(|i| i % 3).collect();
        let signal: Vec<f64> = y
            .iter()
            .enumerate()
            .map(|(i, &c)| c as f64 * 10.0 + (i % 5) as f64 * 0.1)
            .collect();
        let noise: Vec<f64> = (0..60).map(|i| ((i * 37) % 60) as f64).collect();
        let d = Dataset::new(vec![noise, signal], &y).unwrap();
        assert_eq!(mrmr(&d, 10).unwrap().order, vec![1, 0]);
        assert_eq!(
            mrmr(&Dataset::new(vec![vec![0.0; 4]], &[0, 1, 0, 1]).unwrap(), 10)
                .unwrap()
                .order,
            vec![0]
        );
    }
}
