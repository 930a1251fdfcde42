//! Heterogeneous feature-selection ensemble: five rankers over stratified
//! subsamples, Tanimoto stability, robust rank aggregation and voting.

mod dataset;
mod forest;
mod hfse;
mod ict;
mod lda;
mod mrmr;
mod rank;
mod relief;
mod rra;
mod stability;
mod subsample;
mod tree;

pub use dataset::{Dataset, LabelLevel};
pub use forest::{oob_importance, oob_importance_scores, ForestConfig};
pub use hfse::{hfse_select, run_ranker, AggregationMode, SelectionConfig, SelectionResult, SubsampleOutcome};
pub use ict::{ict_importance, IctConfig};
pub use lda::{ldr_coefficients, ldr_importance};
pub use mrmr::{equal_frequency_bins, mrmr, mutual_information};
pub use rank::{RankList, Ranker};
pub use relief::{relief_f, relief_f_weights};
pub use rra::{beta_scores, rra, rra_pvalue};
pub use stability::{stability, tanimoto, StabilityReport};
pub use subsample::{stratified_subsample, SubsampleSpec};
