use crate::error::{Error, Result};

use super::rank::RankList;

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// β values of sorted normalized ranks: β₍ₖ₎ = P(Binom(n, r₍ₖ₎) ≥ k).
pub fn beta_scores(normalized_ranks: &[f64]) -> Vec<f64> {
    let n = normalized_ranks.len();
    let mut r = normalized_ranks.to_vec();
    r.sort_by(f64::total_cmp);
    r.iter()
        .enumerate()
        .map(|(i, &rk)| {
            let k = i + 1;
            (k..=n)
                .map(|l| binomial(n, l) * rk.powi(l as i32) * (1.0 - rk).powi((n - l) as i32))
                .sum::<f64>()
                .min(1.0)
        })
        .collect()
}

/// p = min(1, n·min β) for one item's normalized ranks in `n` lists.
pub fn rra_pvalue(normalized_ranks: &[f64]) -> f64 {
    let n = normalized_ranks.len() as f64;
    let min_beta = beta_scores(normalized_ranks).into_iter().fold(1.0, f64::min);
    (n * min_beta).min(1.0)
}

/// Per-feature robust rank aggregation p-values over lists of equal length.
pub fn rra(lists: &[RankList]) -> Result<Vec<f64>> {
    let first = lists
        .first()
        .ok_or_else(|| Error::param("rank aggregation needs at least one list"))?;
    let m = first.len();
    if lists.iter().any(|l| l.len() != m || !l.is_permutation()) {
        return Err(Error::param(
            "rank lists must be permutations of the same feature catalog",
        ));
    }
    let ranks: Vec<Vec<usize>> = lists.iter().map(RankList::ranks).collect();
    Ok((0..m)
        .map(|f| {
            let r: Vec<f64> = ranks.iter().map(|rk| rk[f] as f64 / m as f64).collect();
            rra_pvalue(&r)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selection::Ranker;

    #[test]
    fn worked_values() {
        let b = beta_scores(&[0.2; 5]);
        let expected = [0.67232, 0.26272, 0.05792, 0.00672, 0.00032];
        for (x, e) in b.iter().zip(expected) {
            assert!((x - e).abs() < 1e-12);
        }
        assert!((rra_pvalue(&[0.2; 5]) - 0.0016).abs() < 1e-15);
        assert_eq!(rra_pvalue(&[1.0; 5]), 1.0);
        let top = rra_pvalue(&[1.0 / 62.0; 5]);
        assert!((top - 5.0 * (1.0f64 / 62.0).powi(5)).abs() < 1e-20);
    }

    #[test]
    fn improving_a_rank_never_raises_p() {
        let base = [0.3, 0.5, 0.9, 0.1, 0.7];
        let p0 = rra_pvalue(&base);
        for i in 0..5 {
            let mut better = base;
            better[i] *= 0.5;
            assert!(rra_pvalue(&better) <= p0 + 1e-15);
        }
    }

    #[test]
    fn list_order_does_not_matter() {
        let lists: Vec<RankList> = (0..5)
            .map(|s| RankList::from_scores(Ranker::ALL[s], (0..8).map(|i| ((i * (s + 3)) % 8) as f64).collect()))
            .collect();
        let mut rev = lists.clone();
        rev.reverse();
        assert_eq!(rra(&lists).unwrap(), rra(&rev).unwrap());
        let mut short = lists.clone();
        short[0].order.pop();
        assert!(rra(&short).is_err());
    }
}
