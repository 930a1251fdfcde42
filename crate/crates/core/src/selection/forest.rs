use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::rng_for;

use super::dataset::Dataset;
use super::rank::{RankList, Ranker};
use super::tree::{SplitSelector, Tree, TreeParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestConfig {
    pub n_trees: usize,
    /// Candidate features per split; `None` uses round(√features).
    pub mtry: Option<usize>,
    pub min_leaf: usize,
}

impl Default for ForestConfig {
    fn default() -> Self {
        Self {
            n_trees: 100,
            mtry: None,
            min_leaf: 1,
        }
    }
}

/// Per-tree OOB error increase after permuting each feature, averaged over
/// trees with a non-empty out-of-bag set.
pub fn oob_importance_scores(data: &Dataset, config: &ForestConfig, seed: u64) -> Result<Vec<f64>> {
    data.require_classes("OOB importance")?;
    let n = data.n_rows();
    if n < 10 {
        return Err(Error::param(format!("OOB importance needs at least 10 rows, got {n}")));
    }
    let d = data.n_features();
    let mtry = config
        .mtry
        .unwrap_or_else(|| ((d as f64).sqrt().round() as usize).max(1));
    let params = TreeParams {
        selector: SplitSelector::Gini { mtry: Some(mtry) },
        min_parent: 2,
        min_leaf: config.min_leaf.max(1),
    };
    let per_tree: Vec<Option<Vec<f64>>> = (0..config.n_trees as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(seed, &[t]);
            let mut in_bag = vec![false; n];
            let boot: Vec<usize> = (0..n)
                .map(|_| {
                    let i = rng.random_range(0..n);
                    in_bag[i] = true;
                    i
                })
                .collect();
            let oob: Vec<usize> = (0..n).filter(|&i| !in_bag[i]).collect();
            if oob.is_empty() {
                return None;
            }
            let mut scratch = vec![0.0; d];
            let tree = Tree::fit(data, &boot, &params, &mut rng, &mut scratch);
            let errors = |perm: Option<(usize, &[f64])>| {
                oob.iter()
                    .enumerate()
                    .filter(|&(k, &i)| {
                        let pred = tree.predict(|f| match perm {
                            Some((pf, vals)) if pf == f => vals[k],
                            _ => data.cols[f][i],
                        });
                        pred != data.y[i]
                    })
                    .count() as f64
                    / oob.len() as f64
            };
            let base = errors(None);
            let mut imp = vec![0.0; d];
            for f in tree.split_features() {
                let mut vals: Vec<f64> = oob.iter().map(|&i| data.cols[f][i]).collect();
                vals.shuffle(&mut rng);
                imp[f] = errors(Some((f, &vals))) - base;
            }
            Some(imp)
        })
        .collect();
    let used: Vec<&Vec<f64>> = per_tree.iter().flatten().collect();
    if used.is_empty() {
        return Ok(vec![0.0; d]);
    }
    Ok((0..d)
        .map(|f| used.iter().map(|v| v[f]).sum::<f64>() / used.len() as f64)
        .collect())
}

pub fn oob_importance(data: &Dataset, config: &ForestConfig, seed: u64) -> Result<RankList> {
    Ok(RankList::from_scores(
        Ranker::OobImportance,
        oob_importance_scores(data, config, seed)?,
    ))
}
