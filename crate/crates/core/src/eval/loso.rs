use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::model::{KnnModel, ModelConfig};
use crate::signal::CoarseLabel;

use super::metrics::{prf1, ClassMetrics, ConfusionMatrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub participant_id: String,
    pub windows: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Vec<ClassMetrics>,
    /// Macro F1 over the classes present in this participant's truth.
    pub overall_f1: f64,
}

impl FoldResult {
    pub fn from_confusion(participant_id: String, confusion: ConfusionMatrix) -> Self {
        let metrics: Vec<ClassMetrics> = CoarseLabel::ALL.iter().map(|&c| prf1(&confusion, c)).collect();
        let present: Vec<f64> = CoarseLabel::ALL
            .iter()
            .zip(&metrics)
            .filter(|(c, _)| confusion.true_count(**c) > 0)
            .map(|(_, m)| m.f1)
            .collect();
        let overall_f1 = if present.is_empty() {
            0.0
        } else {
            present.iter().sum::<f64>() / present.len() as f64
        };
        Self {
            participant_id,
            windows: confusion.total(),
            confusion,
            metrics,
            overall_f1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation across folds.
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            sd,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub class: CoarseLabel,
    pub precision: Summary,
    pub recall: Summary,
    pub f1: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub model: String,
    pub features: Vec<String>,
    pub folds: Vec<FoldResult>,
    pub per_class: Vec<ClassSummary>,
    pub overall_f1: Summary,
    /// Unweighted mean over classes of the per-class mean F1.
    pub macro_f1: f64,
}

impl EvaluationReport {
    /// Aggregates folds; fold order is by participant id.
    pub fn from_folds(model: impl Into<String>, features: Vec<String>, mut folds: Vec<FoldResult>) -> Result<Self> {
        if folds.is_empty() {
            return Err(Error::param("no folds to aggregate"));
        }
        folds.sort_by(|a, b| a.participant_id.cmp(&b.participant_id));
        let per_class: Vec<ClassSummary> = (0..5)
            .map(|c| {
                let pick = |f: fn(&ClassMetrics) -> f64| {
                    Summary::of(&folds.iter().map(|x| f(&x.metrics[c])).collect::<Vec<_>>())
                };
                ClassSummary {
                    class: CoarseLabel::ALL[c],
                    precision: pick(|m| m.precision),
                    recall: pick(|m| m.recall),
                    f1: pick(|m| m.f1),
                }
            })
            .collect();
        let macro_f1 = per_class.iter().map(|c| c.f1.mean).sum::<f64>() / per_class.len() as f64;
        Ok(Self {
            model: model.into(),
            features,
            overall_f1: Summary::of(&folds.iter().map(|f| f.overall_f1).collect::<Vec<_>>()),
            folds,
            per_class,
            macro_f1,
        })
    }

    pub fn pooled_confusion(&self) -> ConfusionMatrix {
        let mut m = ConfusionMatrix::default();
        for f in &self.folds {
            m.add(&f.confusion);
        }
        m
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Long-format confusion counts: `participant,true,predicted,count`.
    pub fn write_confusion_csv(&self, path: &Path) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path)?;
        wtr.write_record(["participant", "true", "predicted", "count"])?;
        for f in &self.folds {
            for t in CoarseLabel::ALL {
                for p in CoarseLabel::ALL {
                    let n = f.confusion.counts[t.index()][p.index()];
                    wtr.write_record([f.participant_id.as_str(), t.as_str(), p.as_str(), &n.to_string()])?;
                }
            }
        }
        wtr.flush().map_err(|e| Error::io(path, e))
    }

    /// Per-class mean, SD and range of precision, recall and F1.
    pub fn write_table_csv(&self, path: &Path) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path)?;
        wtr.write_record(["class", "metric", "mean", "sd", "min", "max"])?;
        for c in &self.per_class {
            for (name, s) in [("precision", c.precision), ("recall", c.recall), ("f1", c.f1)] {
                wtr.write_record([
                    c.class.as_str(),
                    name,
                    &format!("{:.4}", s.mean),
                    &format!("{:.4}", s.sd),
                    &format!("{:.4}", s.min),
                    &format!("{:.4}", s.max),
                ])?;
            }
        }
        wtr.flush().map_err(|e| Error::io(path, e))
    }
}

/// Leave-one-subject-out cross-validation: one fold per participant, each
/// trained (standardizer included) on the other participants' rows.
pub fn loso_cv<S: AsRef<str> + Sync>(
    matrix: &FeatureMatrix,
    selected: &[S],
    config: &ModelConfig,
    model_name: &str,
) -> Result<EvaluationReport> {
    let participants = matrix.participant_ids();
    if participants.len() < 2 {
        return Err(Error::param("leave-one-subject-out needs at least two participants"));
    }
    let folds: Vec<FoldResult> = participants
        .par_iter()
        .map(|held_out| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..matrix.n_rows()).partition(|&i| &matrix.participants[i] == held_out);
            if train.iter().any(|&i| &matrix.participants[i] == held_out) {
                return Err(Error::Leakage(format!(
                    "participant {held_out} appears in its own training fold"
                )));
            }
            let train_m = matrix.select_rows(&train);
            let test_m = matrix.select_rows(&test);
            let model = KnnModel::train(&train_m, selected, config.k)?;
            let predicted = model.predict_matrix(&test_m)?;
            let truth: Vec<CoarseLabel> = test_m.labels.iter().map(|l| l.coarse()).collect();
            Ok(FoldResult::from_confusion(
                held_out.clone(),
                ConfusionMatrix::from_pairs(&truth, &predicted),
            ))
        })
        .collect::<Result<_>>()?;
    let total: usize = folds.iter().map(|f| f.windows).sum();
    if total != matrix.n_rows() {
        return Err(Error::Pipeline(format!(
            "folds evaluated {total} windows of {}",
            matrix.n_rows()
        )));
    }
    EvaluationReport::from_folds(
        model_name,
        selected.iter().map(|s| s.as_ref().to_string()).collect(),
        folds,
    )
}
