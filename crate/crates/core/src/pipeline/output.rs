use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::{ComparisonReport, EvaluationReport, Summary};
use crate::features::extract_matrix;
use crate::selection::SelectionResult;
use crate::synth::WindowStore;

use super::config::{PipelineConfig, Workflow};
use super::workflow::{real_windows, run_ccm, run_compare, run_fim, synthetic_windows, CcmOutcome, FimOutcome};

/// Creates `dir`, refusing to reuse a non-empty directory unless `force`.
/// Forced reruns overwrite files in place.
pub fn prepare_output_dir(dir: &Path, force: bool) -> Result<()> {
    if dir.exists() {
        if !dir.is_dir() {
            return Err(Error::param(format!(
                "output path {} is not a directory",
                dir.display()
            )));
        }
        let occupied = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?.next().is_some();
        if occupied && !force {
            return Err(Error::param(format!(
                "output directory {} is not empty; choose a new directory or pass --force",
                dir.display()
            )));
        }
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub const RUN_MANIFEST: &str = "run_manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub seed: u64,
    pub config_sha256: String,
    pub versions: BTreeMap<String, String>,
    /// Files written, relative to the output directory.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: &PipelineConfig) -> Result<Self> {
        let version = env!("CARGO_PKG_VERSION").to_string();
        let versions = ["signal", "synth", "features", "selection", "model", "eval", "pipeline"]
            .iter()
            .map(|m| (format!("{}::{m}", env!("CARGO_PKG_NAME")), version.clone()))
            .collect();
        Ok(Self {
            command: command.to_string(),
            seed: config.seed,
            config_sha256: config.sha256()?,
            versions,
            outputs: Vec::new(),
        })
    }

    pub fn write(&mut self, dir: &Path) -> Result<()> {
        self.outputs.sort();
        self.outputs.dedup();
        write_json(&dir.join(RUN_MANIFEST), self)
    }
}

fn persist_selection(dir: &Path, prefix: &str, selection: &SelectionResult, manifest: &mut RunManifest) -> Result<()> {
    selection.write_json(&dir.join(format!("{prefix}selection.json")))?;
    selection.write_vote_csv(&dir.join(format!("{prefix}votes.csv")))?;
    manifest.outputs.push(format!("{prefix}selection.json"));
    manifest.outputs.push(format!("{prefix}votes.csv"));
    Ok(())
}

pub fn persist_evaluation(
    dir: &Path,
    prefix: &str,
    report: &EvaluationReport,
    manifest: &mut RunManifest,
) -> Result<()> {
    report.write_json(&dir.join(format!("{prefix}evaluation.json")))?;
    report.write_confusion_csv(&dir.join(format!("{prefix}confusion.csv")))?;
    report.write_table_csv(&dir.join(format!("{prefix}table.csv")))?;
    for f in ["evaluation.json", "confusion.csv", "table.csv"] {
        manifest.outputs.push(format!("{prefix}{f}"));
    }
    Ok(())
}

fn persist_fim(dir: &Path, o: &FimOutcome, manifest: &mut RunManifest) -> Result<()> {
    persist_selection(dir, "fim_", &o.selection, manifest)?;
    persist_evaluation(dir, "fim_", &o.report, manifest)
}

fn persist_ccm(dir: &Path, o: &CcmOutcome, manifest: &mut RunManifest) -> Result<()> {
    write_json(&dir.join("ccm_split.json"), &o.split)?;
    manifest.outputs.push("ccm_split.json".into());
    persist_selection(dir, "ccm_", &o.selection, manifest)?;
    persist_evaluation(dir, "ccm_", &o.report, manifest)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub fim: Option<FimOutcome>,
    pub ccm: Option<CcmOutcome>,
    pub comparison: Option<ComparisonReport>,
    pub manifest: RunManifest,
}

/// Runs the configured workflow end to end and persists every report
/// under `out`.
pub fn run_pipeline(config: &PipelineConfig, out: &Path, force: bool) -> Result<RunOutcome> {
    config.validate()?;
    prepare_output_dir(out, force)?;
    let mut manifest = RunManifest::new("run", config)?;
    write_json(&out.join("config.json"), config)?;
    manifest.outputs.push("config.json".into());

    let real = real_windows(config)?;
    log::info!("{} real windows from {} participants", real.len(), {
        let mut ids: Vec<&str> = real.iter().map(|w| w.participant_id.as_str()).collect();
        ids.sort_unstable();
        ids.dedup();
        ids.len()
    });
    let real_m = extract_matrix(&real);
    real_m.write_csv(&out.join("real_features.csv"))?;
    manifest.outputs.push("real_features.csv".into());

    let fim = if matches!(config.workflow, Workflow::Fim | Workflow::Both) {
        let synthetic = synthetic_windows(&real, config)?;
        if config.data.synthetic.is_none() {
            let store_dir = out.join("synthetic");
            std::fs::create_dir_all(&store_dir).map_err(|e| Error::io(&store_dir, e))?;
            WindowStore::new(&store_dir).write(&synthetic, config.seed, serde_json::to_value(&config.synthesis)?)?;
            manifest.outputs.push("synthetic/".into());
        }
        let synth_m = extract_matrix(&synthetic);
        synth_m.write_csv(&out.join("synthetic_features.csv"))?;
        manifest.outputs.push("synthetic_features.csv".into());
        log::info!("FIM: selecting on {} synthetic windows", synth_m.n_rows());
        let o = run_fim(&real_m, &synth_m, config)?;
        persist_fim(out, &o, &mut manifest)?;
        Some(o)
    } else {
        None
    };

    let ccm = if matches!(config.workflow, Workflow::Ccm | Workflow::Both) {
        log::info!(
            "CCM: selecting on a {:.0}% real split",
            100.0 * config.ccm.selection_fraction
        );
        let o = run_ccm(&real_m, config)?;
        persist_ccm(out, &o, &mut manifest)?;
        Some(o)
    } else {
        None
    };

    let comparison = match (&fim, &ccm) {
        (Some(f), Some(c)) => {
            let cmp = run_compare(&c.report, &f.report)?;
            cmp.write_json(&out.join("comparison.json"))?;
            manifest.outputs.push("comparison.json".into());
            Some(cmp)
        }
        _ => None,
    };
    manifest.write(out)?;
    Ok(RunOutcome {
        fim,
        ccm,
        comparison,
        manifest,
    })
}

fn cell(s: &Summary) -> String {
    format!("{:.3} ± {:.3} ({:.2}-{:.2})", s.mean, s.sd, s.min, s.max)
}

/// Plain-text per-class table: mean ± SD (min-max) over LOSO folds.
pub fn render_evaluation(report: &EvaluationReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} ({} folds; features: {})",
        report.model,
        report.folds.len(),
        report.features.join(", ")
    );
    let _ = writeln!(s, "{:<10} {:<28} {:<28} {:<28}", "class", "precision", "recall", "f1");
    for c in &report.per_class {
        let _ = writeln!(
            s,
            "{:<10} {:<28} {:<28} {:<28}",
            c.class.as_str(),
            cell(&c.precision),
            cell(&c.recall),
            cell(&c.f1)
        );
    }
    let _ = writeln!(s, "overall F1 {}", cell(&report.overall_f1));
    let _ = writeln!(s, "macro F1   {:.3}", report.macro_f1);
    s
}

pub fn render_comparison(report: &ComparisonReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{} vs {} over {} participants",
        report.model_a,
        report.model_b,
        report.participants.len()
    );
    let _ = writeln!(
        s,
        "friedman chi2 {:.4}  p {:.4}",
        report.friedman.statistic, report.friedman.p_value
    );
    let _ = writeln!(
        s,
        "wilcoxon W {:.1}  corrected p {:.4} ({} comparison{})",
        report.wilcoxon.statistic,
        report.wilcoxon.p_value,
        report.comparisons,
        if report.comparisons == 1 { "" } else { "s" }
    );
    let _ = writeln!(s, "winner: {}", report.winner.as_deref().unwrap_or("none"));
    for d in &report.per_class {
        let _ = writeln!(
            s,
            "{:<10} {:.3} -> {:.3} ({:+.3})",
            d.class.as_str(),
            d.f1_a,
            d.f1_b,
            d.delta
        );
    }
    s
}

/// Renders every report found in a run directory.
pub fn render_run_dir(dir: &Path) -> Result<String> {
    let mut s = String::new();
    let mut found = false;
    for prefix in ["fim_", "ccm_", ""] {
        let p: PathBuf = dir.join(format!("{prefix}evaluation.json"));
        if p.exists() {
            s.push_str(&render_evaluation(&EvaluationReport::read_json(&p)?));
            s.push('\n');
            found = true;
        }
    }
    let p = dir.join("comparison.json");
    if p.exists() {
        let text = std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        s.push_str(&render_comparison(&serde_json::from_str(&text)?));
        found = true;
    }
    if !found {
        return Err(Error::Format(format!(
            "{} holds no evaluation or comparison reports",
            dir.display()
        )));
    }
    Ok(s)
}
