use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{compare_models, loso_cv, ComparisonReport, EvaluationReport};
use crate::features::FeatureMatrix;
use crate::rng::{derive_seed, rng_for};
use crate::selection::{hfse_select, SelectionResult};
use crate::signal::{
    load_session, segment, sgolay_smooth, simulate_cohort, synchronize, write_annotations, write_series, CohortSpec,
    FineLabel, Origin,
};
use crate::synth::{synthesize_dataset, WindowStore};
use crate::{LabeledWindow, RecordingSession};

use super::config::{CcmConfig, PipelineConfig, PreprocessConfig, SessionEntry, SplitLevel};

/// Stage indices mixed into the master seed.
pub mod stage {
    pub const SIMULATE: u64 = 0;
    pub const SYNTHESIS: u64 = 1;
    pub const FIM_SELECTION: u64 = 2;
    pub const CCM_SPLIT: u64 = 3;
    pub const CCM_SELECTION: u64 = 4;
}

pub fn load_sessions(path: &Path) -> Result<Vec<RecordingSession>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let entries: Vec<SessionEntry> = serde_json::from_str(&text)?;
    let base = path.parent().unwrap_or(Path::new("."));
    entries
        .par_iter()
        .map(|e| {
            let session = load_session(
                &e.participant_id,
                &base.join(&e.thigh),
                &base.join(&e.back),
                &base.join(&e.annotations),
            )?;
            match (e.thigh_event_s, e.back_event_s) {
                (Some(t), Some(b)) => synchronize(&session, t, b),
                (None, None) => Ok(session),
                _ => Err(Error::param(format!(
                    "{}: give both thigh_event_s and back_event_s or neither",
                    e.participant_id
                ))),
            }
        })
        .collect()
}

/// Writes each session as three CSV files under `dir` and returns the
/// matching sessions-file entries.
pub fn write_sessions(dir: &Path, sessions: &[RecordingSession]) -> Result<Vec<SessionEntry>> {
    sessions
        .iter()
        .map(|s| {
            let id = &s.participant_id;
            let entry = SessionEntry {
                participant_id: id.clone(),
                thigh: format!("{id}_thigh.csv").into(),
                back: format!("{id}_back.csv").into(),
                annotations: format!("{id}_labels.csv").into(),
                thigh_event_s: None,
                back_event_s: None,
            };
            write_series(&dir.join(&entry.thigh), &s.thigh)?;
            write_series(&dir.join(&entry.back), &s.back)?;
            write_annotations(&dir.join(&entry.annotations), &s.annotations)?;
            Ok(entry)
        })
        .collect()
}

/// Smooths every stream and tiles the sessions into labelled windows.
pub fn prepare_windows(sessions: &[RecordingSession], config: &PreprocessConfig) -> Result<Vec<LabeledWindow>> {
    let per_session: Vec<Vec<LabeledWindow>> = sessions
        .par_iter()
        .map(|s| {
            let smoothed = s.map_series(|x| sgolay_smooth(x, config.sgolay_frame_s, config.sgolay_order))?;
            Ok(segment(&smoothed, config.window_s))
        })
        .collect::<Result<_>>()?;
    Ok(per_session.into_iter().flatten().collect())
}

/// Real windows from whichever data source the config names.
pub fn real_windows(config: &PipelineConfig) -> Result<Vec<LabeledWindow>> {
    let d = &config.data;
    let windows = if let Some(dir) = &d.windows {
        WindowStore::new(dir).read::<f64>()?.1
    } else if let Some(path) = &d.sessions {
        prepare_windows(&load_sessions(path)?, &config.preprocess)?
    } else if let Some(path) = &d.cohort {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let spec: CohortSpec = serde_json::from_str(&text)?;
        let sessions = simulate_cohort(&spec, derive_seed(config.seed, &[stage::SIMULATE]))?;
        prepare_windows(&sessions, &config.preprocess)?
    } else {
        return Err(Error::param(
            "no data source: set data.sessions, data.windows or data.cohort",
        ));
    };
    if windows.is_empty() {
        return Err(Error::Format("the data source produced no labelled windows".into()));
    }
    if windows.iter().any(|w| w.origin != Origin::Real) {
        return Err(Error::Format("real data source contains synthetic windows".into()));
    }
    Ok(windows)
}

pub fn label_counts(windows: &[LabeledWindow]) -> BTreeMap<FineLabel, usize> {
    let mut counts = BTreeMap::new();
    for w in windows {
        *counts.entry(w.label).or_insert(0) += 1;
    }
    counts
}

/// Loads the configured synthetic store or generates a count-matched one.
pub fn synthetic_windows(real: &[LabeledWindow], config: &PipelineConfig) -> Result<Vec<LabeledWindow>> {
    let synthetic = match &config.data.synthetic {
        Some(dir) => WindowStore::new(dir).read::<f64>()?.1,
        None => synthesize_dataset(real, &config.synthesis, derive_seed(config.seed, &[stage::SYNTHESIS]))?,
    };
    if synthetic.iter().any(|w| w.origin != Origin::Synthetic) {
        return Err(Error::Leakage("synthetic dataset contains real windows".into()));
    }
    let (want, got) = (label_counts(real), label_counts(&synthetic));
    if want != got {
        return Err(Error::Pipeline(format!(
            "synthetic counts {got:?} do not match real counts {want:?}"
        )));
    }
    Ok(synthetic)
}

fn require_origin(matrix: &FeatureMatrix, origin: Origin, what: &str) -> Result<()> {
    match matrix.origins.iter().position(|&o| o != origin) {
        Some(i) => Err(Error::Leakage(format!(
            "{what} row {i} has origin {}, expected {}",
            matrix.origins[i].as_str(),
            origin.as_str()
        ))),
        None => Ok(()),
    }
}

fn require_features(selection: &SelectionResult, config: &PipelineConfig) -> Result<()> {
    if selection.final_features.is_empty() {
        return Err(Error::Pipeline(format!(
            "no feature reached {} votes\n{}",
            config.selection.vote_threshold,
            selection.vote_table()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct FimOutcome {
    pub selection: SelectionResult,
    pub report: EvaluationReport,
}

/// Feature intervention: select on synthetic rows only, then LOSO on real rows.
pub fn run_fim(real: &FeatureMatrix, synthetic: &FeatureMatrix, config: &PipelineConfig) -> Result<FimOutcome> {
    require_origin(synthetic, Origin::Synthetic, "FIM selection matrix")?;
    require_origin(real, Origin::Real, "FIM evaluation matrix")?;
    let selection = hfse_select(
        synthetic,
        &config.selection,
        derive_seed(config.seed, &[stage::FIM_SELECTION]),
    )?;
    require_features(&selection, config)?;
    let report = loso_cv(real, &selection.final_features, &config.model, "FIM")?;
    Ok(FimOutcome { selection, report })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcmSplit {
    pub level: SplitLevel,
    pub selection_rows: Vec<usize>,
    pub evaluation_rows: Vec<usize>,
}

impl CcmSplit {
    /// Disjoint, and together covering `0..n`.
    pub fn check(&self, n: usize) -> Result<()> {
        let mut seen = vec![false; n];
        for &r in self.selection_rows.iter().chain(&self.evaluation_rows) {
            if r >= n || seen[r] {
                return Err(Error::Leakage(format!(
                    "CCM split row {r} is duplicated or out of range"
                )));
            }
            seen[r] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Pipeline("CCM split does not cover every window".into()));
        }
        Ok(())
    }
}

/// Window level: round(f * n) windows of every activity go to selection.
/// Participant level: round(f * P) whole participants go to selection.
pub fn ccm_split(matrix: &FeatureMatrix, config: &CcmConfig, seed: u64) -> Result<CcmSplit> {
    let f = config.selection_fraction;
    let mut rng = rng_for(seed, &[]);
    let mut selected = vec![false; matrix.n_rows()];
    match config.split {
        SplitLevel::Window => {
            for label in FineLabel::ALL {
                let mut rows: Vec<usize> = (0..matrix.n_rows()).filter(|&i| matrix.labels[i] == label).collect();
                rows.shuffle(&mut rng);
                let take = (f * rows.len() as f64).round() as usize;
                for &r in &rows[..take] {
                    selected[r] = true;
                }
            }
        }
        SplitLevel::Participant => {
            let mut ids = matrix.participant_ids();
            ids.shuffle(&mut rng);
            let take = ((f * ids.len() as f64).round() as usize).max(1);
            if ids.len() < take + 2 {
                return Err(Error::param(format!(
                    "participant split of {} leaves fewer than two participants for evaluation",
                    ids.len()
                )));
            }
            let chosen: std::collections::BTreeSet<&String> = ids[..take].iter().collect();
            for (i, p) in matrix.participants.iter().enumerate() {
                selected[i] = chosen.contains(p);
            }
        }
    }
    let (selection_rows, evaluation_rows) = (0..matrix.n_rows()).partition(|&i| selected[i]);
    Ok(CcmSplit {
        level: config.split,
        selection_rows,
        evaluation_rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CcmOutcome {
    pub split: CcmSplit,
    pub selection: SelectionResult,
    pub report: EvaluationReport,
}

/// Control condition: select on a held-aside share of real windows, LOSO on the rest.
pub fn run_ccm(real: &FeatureMatrix, config: &PipelineConfig) -> Result<CcmOutcome> {
    require_origin(real, Origin::Real, "CCM matrix")?;
    let split = ccm_split(real, &config.ccm, derive_seed(config.seed, &[stage::CCM_SPLIT]))?;
    split.check(real.n_rows())?;
    let selection = hfse_select(
        &real.select_rows(&split.selection_rows),
        &config.selection,
        derive_seed(config.seed, &[stage::CCM_SELECTION]),
    )?;
    require_features(&selection, config)?;
    let report = loso_cv(
        &real.select_rows(&split.evaluation_rows),
        &selection.final_features,
        &config.model,
        "CCM",
    )?;
    Ok(CcmOutcome {
        split,
        selection,
        report,
    })
}

fn restrict(report: &EvaluationReport, keep: &[String]) -> Result<EvaluationReport> {
    let folds = report
        .folds
        .iter()
        .filter(|f| keep.contains(&f.participant_id))
        .cloned()
        .collect();
    EvaluationReport::from_folds(report.model.clone(), report.features.clone(), folds)
}

/// Paired comparison over the participants both reports evaluated.
pub fn run_compare(a: &EvaluationReport, b: &EvaluationReport) -> Result<ComparisonReport> {
    let ids = |r: &EvaluationReport| r.folds.iter().map(|f| f.participant_id.clone()).collect::<Vec<_>>();
    let (ia, ib) = (ids(a), ids(b));
    if ia == ib {
        return compare_models(a, b);
    }
    let common: Vec<String> = ia.into_iter().filter(|p| ib.contains(p)).collect();
    if common.len() < 2 {
        return Err(Error::Pipeline("reports share fewer than two participants".into()));
    }
    compare_models(&restrict(a, &common)?, &restrict(b, &common)?)
}
