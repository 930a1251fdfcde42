//! Classification trees shared by the interaction-curvature ranker and the
//! random forest.

use rand::seq::index::sample;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::dataset::Dataset;
use crate::rng::StageRng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum SplitSelector {
    /// Best Gini gain over a random subset of `mtry` features (all if `None`).
    Gini { mtry: Option<usize> },
    /// Feature chosen by the curvature test, stopping when the
    /// Bonferroni-adjusted p-value exceeds `alpha`.
    Curvature { alpha: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct TreeParams {
    pub selector: SplitSelector,
    pub min_parent: usize,
    pub min_leaf: usize,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Leaf(usize),
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Tree {
    nodes: Vec<Node>,
}

pub(crate) fn gini(counts: &[usize], n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    1.0 - counts.iter().map(|&c| (c as f64 / n).powi(2)).sum::<f64>()
}

fn majority(counts: &[usize]) -> usize {
    let mut best = 0;
    for (c, &k) in counts.iter().enumerate() {
        if k > counts[best] {
            best = c;
        }
    }
    best
}

/// Best threshold on one feature: (weighted impurity decrease, threshold).
pub(crate) fn best_gini_split(
    col: &[f64],
    y: &[usize],
    rows: &[usize],
    n_classes: usize,
    min_leaf: usize,
) -> Option<(f64, f64)> {
    let n = rows.len();
    let mut sorted: Vec<usize> = rows.to_vec();
    sorted.sort_by(|&a, &b| col[a].total_cmp(&col[b]).then(a.cmp(&b)));
    let mut total = vec![0; n_classes];
    for &r in rows {
        total[y[r]] += 1;
    }
    let parent = gini(&total, n);
    let mut left = vec![0; n_classes];
    let mut right = total.clone();
    let mut best: Option<(f64, f64)> = None;
    for i in 0..n - 1 {
        let r = sorted[i];
        left[y[r]] += 1;
        right[y[r]] -= 1;
        let (a, b) = (col[r], col[sorted[i + 1]]);
        let nl = i + 1;
        if a == b || nl < min_leaf || n - nl < min_leaf {
            continue;
        }
        let gain = parent - (nl as f64 * gini(&left, nl) + (n - nl) as f64 * gini(&right, n - nl)) / n as f64;
        if best.is_none_or(|(g, _)| gain > g) {
            best = Some((gain, a + (b - a) / 2.0));
        }
    }
    best
}

/// Chi-square independence statistic and degrees of freedom of a contingency
/// table, ignoring empty rows and columns.
pub(crate) fn chi_square(table: &[Vec<usize>]) -> (f64, usize) {
    let rows: Vec<&Vec<usize>> = table.iter().filter(|r| r.iter().sum::<usize>() > 0).collect();
    if rows.is_empty() {
        return (0.0, 0);
    }
    let n_cols = rows[0].len();
    let col_tot: Vec<usize> = (0..n_cols).map(|c| rows.iter().map(|r| r[c]).sum()).collect();
    let live: Vec<usize> = (0..n_cols).filter(|&c| col_tot[c] > 0).collect();
    let n: usize = col_tot.iter().sum();
    let mut stat = 0.0;
    for r in &rows {
        let rt: usize = r.iter().sum();
        for &c in &live {
            let e = rt as f64 * col_tot[c] as f64 / n as f64;
            stat += (r[c] as f64 - e).powi(2) / e;
        }
    }
    (stat, (rows.len() - 1) * (live.len().saturating_sub(1)))
}

/// −ln p of a chi-square statistic. When p underflows, the asymptotic
/// expansion of the upper incomplete gamma function takes over.
pub(crate) fn chi_square_neg_log_p(stat: f64, df: usize) -> f64 {
    if df == 0 || stat <= 0.0 {
        return 0.0;
    }
    let p = ChiSquared::new(df as f64).expect("positive df").sf(stat);
    if p > 1e-300 {
        return -p.ln();
    }
    // Q(a, x) ~ x^(a−1) e^(−x) / Γ(a) · Σ_k (a−1)(a−2)…(a−k) / x^k
    let (a, x) = (df as f64 / 2.0, stat / 2.0);
    let (mut term, mut series) = (1.0, 1.0);
    for k in 1..20 {
        term *= (a - k as f64) / x;
        if term.abs() < 1e-17 {
            break;
        }
        series += term;
    }
    -((a - 1.0) * x.ln() - x - statrs::function::gamma::ln_gamma(a) + series.ln())
}

/// Quartile codes (0..=3) of `col` over `rows`, cut at the type-7 quartiles.
pub(crate) fn quartile_codes(col: &[f64], rows: &[usize]) -> Vec<usize> {
    let mut v: Vec<f64> = rows.iter().map(|&r| col[r]).collect();
    v.sort_by(f64::total_cmp);
    let mut cuts: Vec<f64> = [0.25, 0.5, 0.75]
        .iter()
        .map(|&p| crate::features::quantile(&v, p))
        .collect();
    cuts.dedup();
    rows.iter()
        .map(|&r| cuts.iter().filter(|&&c| col[r] > c).count())
        .collect()
}

fn table(codes: &[usize], y: &[usize], rows: &[usize], n_codes: usize, n_classes: usize) -> Vec<Vec<usize>> {
    let mut t = vec![vec![0; n_classes]; n_codes];
    for (&c, &r) in codes.iter().zip(rows) {
        t[c][y[r]] += 1;
    }
    t
}

impl Tree {
    /// Grows a tree on `rows` of `data`, adding each split's impurity
    /// decrease (weighted by node share of `rows`) to `importance`.
    pub(crate) fn fit(
        data: &Dataset,
        rows: &[usize],
        params: &TreeParams,
        rng: &mut StageRng,
        importance: &mut [f64],
    ) -> Self {
        let total = rows.len() as f64;
        let mut nodes = vec![Node::Leaf(0)];
        let mut stack = vec![(0usize, rows.to_vec())];
        while let Some((id, node_rows)) = stack.pop() {
            let mut counts = vec![0; data.n_classes];
            for &r in &node_rows {
                counts[data.y[r]] += 1;
            }
            nodes[id] = Node::Leaf(majority(&counts));
            let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
            if pure || node_rows.len() < params.min_parent {
                continue;
            }
            let chosen = match params.selector {
                SplitSelector::Gini { mtry } => {
                    let d = data.n_features();
                    let mut cands: Vec<usize> = match mtry {
                        Some(m) if m < d => sample(rng, d, m).into_vec(),
                        _ => (0..d).collect(),
                    };
                    cands.sort_unstable();
                    let mut best: Option<(usize, f64, f64)> = None;
                    for f in cands {
                        if let Some((g, t)) =
                            best_gini_split(&data.cols[f], &data.y, &node_rows, data.n_classes, params.min_leaf)
                        {
                            if best.is_none_or(|(_, bg, _)| g > bg) {
                                best = Some((f, g, t));
                            }
                        }
                    }
                    best
                }
                SplitSelector::Curvature { alpha } => curvature_choice(data, &node_rows, alpha).and_then(|f| {
                    best_gini_split(&data.cols[f], &data.y, &node_rows, data.n_classes, params.min_leaf)
                        .map(|(g, t)| (f, g, t))
                }),
            };
            let Some((feature, gain, threshold)) = chosen else {
                continue;
            };
            if gain <= 0.0 {
                continue;
            }
            importance[feature] += gain * node_rows.len() as f64 / total;
            let (l, r): (Vec<usize>, Vec<usize>) = node_rows.iter().partition(|&&i| data.cols[feature][i] <= threshold);
            let (left, right) = (nodes.len(), nodes.len() + 1);
            nodes.push(Node::Leaf(0));
            nodes.push(Node::Leaf(0));
            nodes[id] = Node::Split {
                feature,
                threshold,
                left,
                right,
            };
            stack.push((right, r));
            stack.push((left, l));
        }
        Self { nodes }
    }

    pub(crate) fn predict(&self, value: impl Fn(usize) -> f64) -> usize {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf(c) => return c,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if value(feature) <= threshold { left } else { right },
            }
        }
    }

    pub(crate) fn split_features(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Split { feature, .. } => Some(*feature),
                Node::Leaf(_) => None,
            })
            .collect();
        f.sort_unstable();
        f.dedup();
        f
    }

    #[cfg(test)]
    pub(crate) fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf(_) => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Split variable by the curvature test: the largest −ln p of the
/// quartile-coded feature against the class. Exact ties go to the feature
/// whose strongest pairwise interaction test (joint quartile codes against
/// the class) among the tied set is largest, then to the lower index.
/// `None` when the Bonferroni-adjusted p-value exceeds `alpha`.
fn curvature_choice(data: &Dataset, rows: &[usize], alpha: f64) -> Option<usize> {
    let d = data.n_features();
    let codes: Vec<Vec<usize>> = data.cols.iter().map(|c| quartile_codes(c, rows)).collect();
    let scores: Vec<f64> = codes
        .iter()
        .map(|c| {
            let (s, df) = chi_square(&table(c, &data.y, rows, 4, data.n_classes));
            chi_square_neg_log_p(s, df)
        })
        .collect();
    let top = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // p·d > alpha  ⇔  −ln p < ln d − ln alpha
    if top <= 0.0 || top < (d as f64).ln() - alpha.ln() {
        return None;
    }
    let tied: Vec<usize> = (0..d).filter(|&f| scores[f] == top).collect();
    if tied.len() == 1 {
        return Some(tied[0]);
    }
    let mut best = (tied[0], f64::NEG_INFINITY);
    for &f in &tied {
        let strength = tied
            .iter()
            .filter(|&&g| g != f)
            .map(|&g| {
                let joint: Vec<usize> = codes[f].iter().zip(&codes[g]).map(|(a, b)| a * 4 + b).collect();
                let (s, df) = chi_square(&table(&joint, &data.y, rows, 16, data.n_classes));
                chi_square_neg_log_p(s, df)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        if strength > best.1 {
            best = (f, strength);
        }
    }
    Some(best.0)
}
