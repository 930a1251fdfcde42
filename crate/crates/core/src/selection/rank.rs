use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ranker {
    ReliefF,
    Mrmr,
    Ict,
    OobImportance,
    Ldr,
}

impl Ranker {
    pub const ALL: [Ranker; 5] = [
        Ranker::ReliefF,
        Ranker::Mrmr,
        Ranker::Ict,
        Ranker::OobImportance,
        Ranker::Ldr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Ranker::ReliefF => "relief_f",
            Ranker::Mrmr => "mrmr",
            Ranker::Ict => "ict",
            Ranker::OobImportance => "oob_importance",
            Ranker::Ldr => "ldr",
        }
    }

    pub fn id(self) -> u64 {
        self as u64
    }
}

/// One ranker's ordering of all features, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankList {
    pub algorithm: Ranker,
    pub order: Vec<usize>,
    pub scores: Option<Vec<f64>>,
}

impl RankList {
    /// Descending by score; equal scores keep column order, so an all-zero
    /// score vector yields the identity permutation.
    pub fn from_scores(algorithm: Ranker, scores: Vec<f64>) -> Self {
        let mut order: Vec<usize> = (0..scores.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        Self {
            algorithm,
            order,
            scores: Some(scores),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// 1-based rank of every column.
    pub fn ranks(&self) -> Vec<usize> {
        let mut r = vec![0; self.order.len()];
        for (pos, &f) in self.order.iter().enumerate() {
            r[f] = pos + 1;
        }
        r
    }

    pub fn top(&self, k: usize) -> Vec<usize> {
        self.order.iter().take(k).copied().collect()
    }

    pub fn is_permutation(&self) -> bool {
        let mut seen = vec![false; self.order.len()];
        self.order
            .iter()
            .all(|&f| f < seen.len() && !std::mem::replace(&mut seen[f], true))
    }
}
