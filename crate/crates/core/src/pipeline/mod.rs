//! The feature-intervention (FIM) and control-condition (CCM) workflows,
//! their configuration and persisted outputs.

mod config;
mod output;
mod workflow;

pub use config::{CcmConfig, DataConfig, PipelineConfig, PreprocessConfig, SessionEntry, SplitLevel, Workflow};
pub use output::{
    persist_evaluation, prepare_output_dir, render_comparison, render_evaluation, render_run_dir, run_pipeline,
    write_json, RunManifest, RunOutcome, RUN_MANIFEST,
};
pub use workflow::{
    ccm_split, label_counts, load_sessions, prepare_windows, real_windows, run_ccm, run_compare, run_fim, stage,
    synthetic_windows, write_sessions, CcmOutcome, CcmSplit, FimOutcome,
};
