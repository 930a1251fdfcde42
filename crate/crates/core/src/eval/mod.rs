//! Leave-one-subject-out evaluation, per-class metrics and the paired
//! model-comparison statistics.

mod compare;
mod loso;
mod metrics;
mod stats;

pub use compare::{compare_models, ClassDelta, ComparisonReport};
pub use loso::{loso_cv, ClassSummary, EvaluationReport, FoldResult, Summary};
pub use metrics::{prf1, ClassMetrics, ConfusionMatrix};
pub use stats::{average_ranks, friedman_test, wilcoxon_signed_rank, TestResult, WILCOXON_EXACT_MAX};
