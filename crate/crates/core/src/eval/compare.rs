use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::CoarseLabel;

use super::loso::EvaluationReport;
use super::stats::{friedman_test, wilcoxon_signed_rank, TestResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDelta {
    pub class: CoarseLabel,
    pub f1_a: f64,
    pub f1_b: f64,
    /// Mean F1 of b minus mean F1 of a.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub model_a: String,
    pub model_b: String,
    pub participants: Vec<String>,
    pub overall_f1_a: Vec<f64>,
    pub overall_f1_b: Vec<f64>,
    pub friedman: TestResult,
    /// Bonferroni-corrected Wilcoxon signed-rank result.
    pub wilcoxon: TestResult,
    pub comparisons: usize,
    /// Model with the higher mean overall F1 when the corrected p < 0.05.
    pub winner: Option<String>,
    pub per_class: Vec<ClassDelta>,
}

impl ComparisonReport {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }
}

pub fn compare_models(a: &EvaluationReport, b: &EvaluationReport) -> Result<ComparisonReport> {
    let ids = |r: &EvaluationReport| r.folds.iter().map(|f| f.participant_id.clone()).collect::<Vec<_>>();
    let participants = ids(a);
    if participants != ids(b) {
        return Err(Error::param("reports cover different participants"));
    }
    let fa: Vec<f64> = a.folds.iter().map(|f| f.overall_f1).collect();
    let fb: Vec<f64> = b.folds.iter().map(|f| f.overall_f1).collect();
    let table: Vec<Vec<f64>> = fa.iter().zip(&fb).map(|(x, y)| vec![*x, *y]).collect();
    let friedman = friedman_test(&table)?;
    let comparisons = 1;
    let wilcoxon = wilcoxon_signed_rank(&fa, &fb, comparisons)?;
    let (ma, mb) = (a.overall_f1.mean, b.overall_f1.mean);
    let winner = (wilcoxon.p_value < 0.05 && ma != mb).then(|| if ma > mb { a.model.clone() } else { b.model.clone() });
    let per_class = a
        .per_class
        .iter()
        .zip(&b.per_class)
        .map(|(x, y)| ClassDelta {
            class: x.class,
            f1_a: x.f1.mean,
            f1_b: y.f1.mean,
            delta: y.f1.mean - x.f1.mean,
        })
        .collect();
    Ok(ComparisonReport {
        model_a: a.model.clone(),
        model_b: b.model.clone(),
        participants,
        overall_f1_a: fa,
        overall_f1_b: fb,
        friedman,
        wilcoxon,
        comparisons,
        winner,
        per_class,
    })
}
