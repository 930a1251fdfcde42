use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::rng::rng_for;

use super::dataset::Dataset;
use super::rank::{RankList, Ranker};
use super::tree::{SplitSelector, Tree, TreeParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IctConfig {
    /// Family-wise level of the curvature stopping test.
    pub alpha: f64,
    pub min_parent: usize,
    pub min_leaf: usize,
}

impl Default for IctConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            min_parent: 10,
            min_leaf: 1,
        }
    }
}

/// Gini importance of a single curvature-test tree grown on all rows.
pub fn ict_importance(data: &Dataset, config: &IctConfig, seed: u64) -> Result<RankList> {
    data.require_classes("interaction-curvature tree")?;
    let rows: Vec<usize> = (0..data.n_rows()).collect();
    let mut importance = vec![0.0; data.n_features()];
    let params = TreeParams {
        selector: SplitSelector::Curvature { alpha: config.alpha },
        min_parent: config.min_parent,
        min_leaf: config.min_leaf,
    };
    Tree::fit(data, &rows, &params, &mut rng_for(seed, &[]), &mut importance);
    Ok(RankList::from_scores(Ranker::Ict, importance))
}
