use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::signal::FineLabel;

/// Column-major view of a feature matrix with dense class indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub cols: Vec<Vec<f64>>,
    pub y: Vec<usize>,
    pub n_classes: usize,
}

impl Dataset {
    /// Class indices are assigned in sorted order of the distinct labels.
    pub fn new<L: Ord + Copy>(cols: Vec<Vec<f64>>, labels: &[L]) -> Result<Self> {
        if cols.iter().any(|c| c.len() != labels.len()) {
            return Err(Error::Format("feature columns and labels differ in length".into()));
        }
        let mut distinct: Vec<L> = labels.to_vec();
        distinct.sort_unstable();
        distinct.dedup();
        let y = labels
            .iter()
            .map(|l| distinct.binary_search(l).expect("label present"))
            .collect();
        Ok(Self {
            cols,
            y,
            n_classes: distinct.len(),
        })
    }

    pub fn from_matrix(matrix: &FeatureMatrix, rows: &[usize], level: LabelLevel) -> Result<Self> {
        let cols = (0..matrix.n_cols())
            .map(|j| rows.iter().map(|&i| matrix.get(i, j)).collect())
            .collect();
        let labels: Vec<usize> = rows.iter().map(|&i| level.class_of(matrix.labels[i])).collect();
        Self::new(cols, &labels)
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_features(&self) -> usize {
        self.cols.len()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut c = vec![0; self.n_classes];
        for &y in &self.y {
            c[y] += 1;
        }
        c
    }

    pub fn require_classes(&self, what: &str) -> Result<()> {
        if self.n_classes < 2 {
            return Err(Error::param(format!("{what} needs at least two classes")));
        }
        Ok(())
    }
}

/// Label granularity the rankers discriminate between.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelLevel {
    Coarse,
    Fine,
}

impl LabelLevel {
    pub fn class_of(self, label: FineLabel) -> usize {
        match self {
            LabelLevel::Coarse => label.coarse().index(),
            LabelLevel::Fine => label.index(),
        }
    }
}
