use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::rank::{RankList, Ranker};

/// 1 − (|s| + |s′| − 2|s∩s′|) / (|s| + |s′| − |s∩s′|); two empty sets give 1.
pub fn tanimoto(s: &BTreeSet<usize>, s_prime: &BTreeSet<usize>) -> f64 {
    let inter = s.intersection(s_prime).count() as f64;
    let (a, b) = (s.len() as f64, s_prime.len() as f64);
    let union = a + b - inter;
    if union == 0.0 {
        return 1.0;
    }
    1.0 - (a + b - 2.0 * inter) / union
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub algorithm: Ranker,
    pub mean_tanimoto: f64,
    pub pairs: Vec<f64>,
}

/// Mean Tanimoto similarity of the top-`top_k` sets over all unordered
/// pairs of rank lists.
pub fn stability(algorithm: Ranker, lists: &[RankList], top_k: usize) -> StabilityReport {
    let sets: Vec<BTreeSet<usize>> = lists.iter().map(|l| l.top(top_k).into_iter().collect()).collect();
    let mut pairs = Vec::with_capacity(sets.len() * sets.len().saturating_sub(1) / 2);
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            pairs.push(tanimoto(&sets[i], &sets[j]));
        }
    }
    let mean_tanimoto = if pairs.is_empty() {
        1.0
    } else {
        pairs.iter().sum::<f64>() / pairs.len() as f64
    };
    StabilityReport {
        algorithm,
        mean_tanimoto,
        pairs,
    }
}
