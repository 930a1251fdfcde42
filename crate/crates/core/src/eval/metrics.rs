use serde::{Deserialize, Serialize};

use crate::signal::CoarseLabel;

/// Counts indexed by (true class, predicted class).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub counts: [[usize; 5]; 5],
}

impl ConfusionMatrix {
    pub fn from_pairs(truth: &[CoarseLabel], predicted: &[CoarseLabel]) -> Self {
        let mut m = Self::default();
        for (t, p) in truth.iter().zip(predicted) {
            m.counts[t.index()][p.index()] += 1;
        }
        m
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn true_count(&self, class: CoarseLabel) -> usize {
        self.counts[class.index()].iter().sum()
    }

    pub fn add(&mut self, other: &ConfusionMatrix) {
        for (r, o) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in r.iter_mut().zip(o) {
                *a += b;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: CoarseLabel,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Set when a zero denominator forced a value to 0.
    pub undefined: bool,
}

/// Precision TP/(TP+FP), recall TP/(TP+FN), F1 = 2PR/(P+R); any zero
/// denominator gives 0 and raises the `undefined` flag.
pub fn prf1(matrix: &ConfusionMatrix, class: CoarseLabel) -> ClassMetrics {
    let c = class.index();
    let tp = matrix.counts[c][c] as f64;
    let predicted: usize = (0..5).map(|t| matrix.counts[t][c]).sum();
    let actual: usize = matrix.counts[c].iter().sum();
    let mut undefined = false;
    let mut ratio = |num: f64, den: f64| {
        if den == 0.0 {
            undefined = true;
            0.0
        } else {
            num / den
        }
    };
    let precision = ratio(tp, predicted as f64);
    let recall = ratio(tp, actual as f64);
    let f1 = ratio(2.0 * precision * recall, precision + recall);
    ClassMetrics {
        class,
        precision,
        recall,
        f1,
        undefined,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let mut m = ConfusionMatrix::default();
        m.counts[0][0] = 3;
        m.counts[1][0] = 1;
        m.counts[0][2] = 2;
        let r = prf1(&m, CoarseLabel::Walk);
        assert_eq!(r.precision, 0.75);
        assert_eq!(r.recall, 0.6);
        assert!((r.f1 - 0.9 / 1.35).abs() < 1e-15);
        assert!(!r.undefined);
        let absent = prf1(&m, CoarseLabel::LieDown);
        assert!(absent.undefined && absent.f1 == 0.0 && absent.precision == 0.0);
    }

    #[test]
    fn diagonal_is_perfect() {
        let truth: Vec<CoarseLabel> = CoarseLabel::ALL.iter().cycle().take(20).copied().collect();
        let m = ConfusionMatrix::from_pairs(&truth, &truth);
        assert_eq!(m.total(), 20);
        for c in CoarseLabel::ALL {
            let r = prf1(&m, c);
            assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
        }
    }
}
