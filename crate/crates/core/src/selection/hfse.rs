use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::rng::{derive_seed, rng_for};

use super::dataset::{Dataset, LabelLevel};
use super::forest::{oob_importance, ForestConfig};
use super::ict::{ict_importance, IctConfig};
use super::lda::ldr_importance;
use super::mrmr::mrmr;
use super::rank::{RankList, Ranker};
use super::relief::relief_f;
use super::rra::rra;
use super::stability::{stability, StabilityReport};
use super::subsample::{stratified_subsample, SubsampleSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AggregationMode {
    /// One aggregation per subsample; features vote across subsamples.
    PerSubsample,
    /// A single aggregation over every list from every subsample.
    Pooled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    pub subsamples: SubsampleSpec,
    pub label_level: LabelLevel,
    pub relief_k: usize,
    pub mrmr_bins: usize,
    pub ict: IctConfig,
    pub forest: ForestConfig,
    pub ldr_gamma: f64,
    pub top_k: usize,
    pub p_threshold: f64,
    pub vote_threshold: usize,
    pub mode: AggregationMode,
    /// Minimum mean Tanimoto a ranker needs to take part in aggregation.
    pub stability_gate: Option<f64>,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        Self {
            subsamples: SubsampleSpec::default(),
            label_level: LabelLevel::Coarse,
            relief_k: 10,
            mrmr_bins: 10,
            ict: IctConfig::default(),
            forest: ForestConfig::default(),
            ldr_gamma: 0.5,
            top_k: 10,
            p_threshold: 0.05,
            vote_threshold: 5,
            mode: AggregationMode::PerSubsample,
            stability_gate: None,
        }
    }
}

impl SelectionConfig {
    pub fn validate(&self) -> Result<()> {
        self.subsamples.validate()?;
        if self.relief_k == 0 || self.mrmr_bins < 2 || self.top_k == 0 || self.forest.n_trees == 0 {
            return Err(Error::param(
                "relief_k, top_k and n_trees must be positive and mrmr_bins at least 2",
            ));
        }
        if !(self.p_threshold > 0.0 && self.p_threshold <= 1.0) {
            return Err(Error::param("p_threshold must be in (0, 1]"));
        }
        if self.vote_threshold == 0 || self.vote_threshold > self.subsamples.count {
            return Err(Error::param("vote_threshold must be between 1 and the subsample count"));
        }
        Ok(())
    }
}

pub fn run_ranker(ranker: Ranker, data: &Dataset, config: &SelectionConfig, seed: u64) -> Result<RankList> {
    match ranker {
        Ranker::ReliefF => relief_f(data, config.relief_k),
        Ranker::Mrmr => mrmr(data, config.mrmr_bins),
        Ranker::Ict => ict_importance(data, &config.ict, seed),
        Ranker::OobImportance => oob_importance(data, &config.forest, seed),
        Ranker::Ldr => ldr_importance(data, config.ldr_gamma),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsampleOutcome {
    pub rows: usize,
    pub rank_lists: Vec<RankList>,
    pub p_values: Vec<f64>,
    pub selected: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub seed: u64,
    pub mode: AggregationMode,
    pub feature_names: Vec<String>,
    pub subsamples: Vec<SubsampleOutcome>,
    /// Per feature, the number of subsamples selecting it.
    pub votes: Vec<usize>,
    pub stability: Vec<StabilityReport>,
    /// Rankers left out of aggregation by the stability gate.
    pub excluded: Vec<Ranker>,
    pub final_features: Vec<String>,
}

fn selected_names(p: &[f64], threshold: f64, names: &[String]) -> Vec<String> {
    (0..p.len())
        .filter(|&f| p[f] < threshold)
        .map(|f| names[f].clone())
        .collect()
}

/// The heterogeneous selection ensemble: stratified subsamples, five
/// rankers per subsample, rank aggregation, and a vote across subsamples.
pub fn hfse_select(matrix: &FeatureMatrix, config: &SelectionConfig, seed: u64) -> Result<SelectionResult> {
    config.validate()?;
    if matrix.n_rows() == 0 {
        return Err(Error::param("feature selection on an empty matrix"));
    }
    let classes: Vec<usize> = matrix.labels.iter().map(|&l| config.label_level.class_of(l)).collect();
    let count = config.subsamples.count;
    let rows: Vec<Vec<usize>> = (0..count as u64)
        .map(|i| stratified_subsample(&classes, config.subsamples.fraction, &mut rng_for(seed, &[0, i])))
        .collect::<Result<_>>()?;
    let datasets: Vec<Dataset> = rows
        .par_iter()
        .map(|r| Dataset::from_matrix(matrix, r, config.label_level))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, Ranker)> = (0..count).flat_map(|i| Ranker::ALL.map(|r| (i, r))).collect();
    let lists: Vec<RankList> = jobs
        .par_iter()
        .map(|&(i, r)| run_ranker(r, &datasets[i], config, derive_seed(seed, &[1, i as u64, r.id()])))
        .collect::<Result<_>>()?;
    let per_subsample: Vec<Vec<RankList>> = lists.chunks(Ranker::ALL.len()).map(<[RankList]>::to_vec).collect();

    let stability_reports: Vec<StabilityReport> = Ranker::ALL
        .iter()
        .enumerate()
        .map(|(k, &r)| {
            let of_ranker: Vec<RankList> = per_subsample.iter().map(|s| s[k].clone()).collect();
            stability(r, &of_ranker, config.top_k)
        })
        .collect();
    let excluded: Vec<Ranker> = match config.stability_gate {
        Some(t) => stability_reports
            .iter()
            .filter(|s| s.mean_tanimoto < t)
            .map(|s| s.algorithm)
            .collect(),
        None => Vec::new(),
    };
    if excluded.len() == Ranker::ALL.len() {
        return Err(Error::Pipeline("every ranker failed the stability gate".into()));
    }
    let kept =
        |s: &[RankList]| -> Vec<RankList> { s.iter().filter(|l| !excluded.contains(&l.algorithm)).cloned().collect() };

    let names = matrix.names.clone();
    let mut votes = vec![0; names.len()];
    let mut subsamples = Vec::with_capacity(count);
    for (i, lists) in per_subsample.iter().enumerate() {
        let p = rra(&kept(lists))?;
        for (v, &pv) in votes.iter_mut().zip(&p) {
            if pv < config.p_threshold {
                *v += 1;
            }
        }
        subsamples.push(SubsampleOutcome {
            rows: rows[i].len(),
            selected: selected_names(&p, config.p_threshold, &names),
            rank_lists: lists.clone(),
            p_values: p,
        });
    }
    let final_features = match config.mode {
        AggregationMode::PerSubsample => (0..names.len())
            .filter(|&f| votes[f] >= config.vote_threshold)
            .map(|f| names[f].clone())
            .collect(),
        AggregationMode::Pooled => {
            let all: Vec<RankList> = per_subsample.iter().flat_map(|s| kept(s)).collect();
            selected_names(&rra(&all)?, config.p_threshold, &names)
        }
    };
    Ok(SelectionResult {
        seed,
        mode: config.mode,
        feature_names: names,
        subsamples,
        votes,
        stability: stability_reports,
        excluded,
        final_features,
    })
}

impl SelectionResult {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Subsample × feature selection indicators, one row per subsample.
    pub fn write_vote_csv(&self, path: &Path) -> Result<()> {
        let mut wtr = csv::Writer::from_path(path)?;
        let mut header = vec!["subsample".to_string()];
        header.extend(self.feature_names.iter().cloned());
        wtr.write_record(&header)?;
        for (i, s) in self.subsamples.iter().enumerate() {
            let mut rec = vec![(i + 1).to_string()];
            rec.extend(
                self.feature_names
                    .iter()
                    .map(|n| u8::from(s.selected.contains(n)).to_string()),
            );
            wtr.write_record(&rec)?;
        }
        wtr.flush().map_err(|e| Error::io(path, e))
    }

    /// Features with at least one vote, most votes first.
    pub fn vote_table(&self) -> String {
        let mut rows: Vec<(usize, &String)> = self
            .votes
            .iter()
            .copied()
            .zip(&self.feature_names)
            .filter(|(v, _)| *v > 0)
            .collect();
        rows.sort_by(|a, b| b.0.cmp(&a.0));
        let mut out = String::new();
        for (v, n) in rows {
            let _ = writeln!(out, "{n:>20} {v:>2}/{}", self.subsamples.len());
        }
        if out.is_empty() {
            out.push_str("no feature received a vote\n");
        }
        out
    }
}
