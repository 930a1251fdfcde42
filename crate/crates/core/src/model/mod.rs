//! K-nearest-neighbour classification over selected, z-standardized
//! features, predicting the five coarse classes.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, StandardizationStats};
use crate::signal::CoarseLabel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub k: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self { k: 5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    k: usize,
    feature_names: Vec<String>,
    standardizer: StandardizationStats,
    rows: Vec<Vec<f64>>,
    labels: Vec<CoarseLabel>,
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    k: usize,
    feature_names: Vec<String>,
    standardizer: StandardizationStats,
    training_rows: usize,
}

impl KnnModel {
    /// Fits the standardizer on `matrix` (the training rows only) and stores
    /// the standardized selected columns with coarse labels.
    pub fn train<S: AsRef<str>>(matrix: &FeatureMatrix, selected: &[S], k: usize) -> Result<Self> {
        if selected.is_empty() {
            return Err(Error::param("no features selected"));
        }
        if k == 0 || k % 2 == 0 {
            return Err(Error::param(format!("k must be odd and at least 1, got {k}")));
        }
        if matrix.n_rows() < k {
            return Err(Error::param(format!(
                "{} training rows is fewer than k = {k}",
                matrix.n_rows()
            )));
        }
        let sub = matrix.select_columns(selected)?;
        let standardizer = StandardizationStats::fit(&sub)?;
        let rows = (0..sub.n_rows()).map(|i| standardizer.apply_row(sub.row(i))).collect();
        Ok(Self {
            k,
            feature_names: sub.names.clone(),
            standardizer,
            rows,
            labels: sub.labels.iter().map(|l| l.coarse()).collect(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn standardizer(&self) -> &StandardizationStats {
        &self.standardizer
    }

    pub fn training_labels(&self) -> &[CoarseLabel] {
        &self.labels
    }

    /// Predicts from raw values of the model's features, in model order.
    ///
    /// Neighbours are the `k` smallest Euclidean distances, equal distances
    /// taken by training-row index. A majority tie goes to the class with the
    /// smaller summed neighbour distance, then to the nearest neighbour's
    /// class, then to the earlier class.
    pub fn predict_row(&self, raw: &[f64]) -> Result<CoarseLabel> {
        if raw.len() != self.feature_names.len() {
            return Err(Error::Format(format!(
                "query has {} values, model expects {}",
                raw.len(),
                self.feature_names.len()
            )));
        }
        if raw.iter().any(|v| !v.is_finite()) {
            return Err(Error::Format("non-finite feature value in query".into()));
        }
        let q = self.standardizer.apply_row(raw);
        let mut dist: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (r.iter().zip(&q).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(), i))
            .collect();
        dist.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let neighbours = &dist[..self.k];
        let mut votes = [0usize; 5];
        let mut summed = [0.0f64; 5];
        for &(d, i) in neighbours {
            let c = self.labels[i].index();
            votes[c] += 1;
            summed[c] += d;
        }
        let top = *votes.iter().max().expect("five classes");
        let tied: Vec<usize> = (0..5).filter(|&c| votes[c] == top).collect();
        let least = tied.iter().map(|&c| summed[c]).fold(f64::INFINITY, f64::min);
        let tied: Vec<usize> = tied.into_iter().filter(|&c| summed[c] == least).collect();
        let nearest = self.labels[neighbours[0].1].index();
        let class = if tied.contains(&nearest) { nearest } else { tied[0] };
        Ok(CoarseLabel::ALL[class])
    }

    /// Predicts every row of a matrix that contains the model's features.
    pub fn predict_matrix(&self, matrix: &FeatureMatrix) -> Result<Vec<CoarseLabel>> {
        let sub = matrix.select_columns(&self.feature_names)?;
        (0..sub.n_rows()).map(|i| self.predict_row(sub.row(i))).collect()
    }

    /// Writes `manifest.json` and `training_rows.csv` (standardized) into `dir`.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let manifest = Manifest {
            k: self.k,
            feature_names: self.feature_names.clone(),
            standardizer: self.standardizer.clone(),
            training_rows: self.rows.len(),
        };
        let path = dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&path, e))?;
        let mut wtr = csv::Writer::from_path(dir.join("training_rows.csv"))?;
        let mut header = self.feature_names.clone();
        header.push("label".into());
        wtr.write_record(&header)?;
        for (r, l) in self.rows.iter().zip(&self.labels) {
            let mut rec: Vec<String> = r.iter().map(f64::to_string).collect();
            rec.push(l.as_str().into());
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(|e| Error::io(dir, e))
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join("manifest.json");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let m: Manifest = serde_json::from_str(&text)?;
        let csv_path = dir.join("training_rows.csv");
        let mut rdr = csv::Reader::from_path(&csv_path)?;
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let bad = |message: String| Error::Parse {
                path: csv_path.clone(),
                line: k + 2,
                message,
            };
            if rec.len() != m.feature_names.len() + 1 {
                return Err(bad(format!("expected {} fields", m.feature_names.len() + 1)));
            }
            let row = (0..m.feature_names.len())
                .map(|j| {
                    rec[j]
                        .parse::<f64>()
                        .map_err(|_| bad(format!("invalid value `{}`", &rec[j])))
                })
                .collect::<Result<Vec<_>>>()?;
            let label_field = &rec[m.feature_names.len()];
            let label = CoarseLabel::ALL
                .into_iter()
                .find(|c| c.as_str() == label_field)
                .ok_or_else(|| bad(format!("unknown class `{label_field}`")))?;
            rows.push(row);
            labels.push(label);
        }
        if rows.len() != m.training_rows {
            return Err(Error::Format(format!(
                "manifest lists {} rows, found {}",
                m.training_rows,
                rows.len()
            )));
        }
        Ok(Self {
            k: m.k,
            feature_names: m.feature_names,
            standardizer: m.standardizer,
            rows,
            labels,
        })
    }
}
