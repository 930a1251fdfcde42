use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::selection::SelectionConfig;
use crate::synth::SynthesisConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PreprocessConfig {
    pub sgolay_frame_s: f64,
    pub sgolay_order: usize,
    pub window_s: f64,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            sgolay_frame_s: 0.12,
            sgolay_order: 2,
            window_s: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Workflow {
    Fim,
    Ccm,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitLevel {
    /// Activity-stratified split of windows; every participant stays in LOSO.
    Window,
    /// Whole participants go to selection and are left out of LOSO.
    Participant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CcmConfig {
    pub selection_fraction: f64,
    pub split: SplitLevel,
}

impl Default for CcmConfig {
    fn default() -> Self {
        Self {
            selection_fraction: 0.25,
            split: SplitLevel::Window,
        }
    }
}

/// Where real windows come from. Exactly one source should be set; the
/// synthetic store is optional and is generated when absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataConfig {
    /// JSON list of [`SessionEntry`] records.
    pub sessions: Option<PathBuf>,
    /// A window store of already segmented real windows.
    pub windows: Option<PathBuf>,
    /// A simulated cohort specification.
    pub cohort: Option<PathBuf>,
    pub synthetic: Option<PathBuf>,
}

/// One participant's recording files. Relative paths resolve against the
/// directory of the sessions file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEntry {
    pub participant_id: String,
    pub thigh: PathBuf,
    pub back: PathBuf,
    pub annotations: PathBuf,
    /// Event times used to synchronise the streams on the first sit-to-stand.
    #[serde(default)]
    pub thigh_event_s: Option<f64>,
    #[serde(default)]
    pub back_event_s: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub data: DataConfig,
    pub seed: u64,
    pub workflow: Workflow,
    pub preprocess: PreprocessConfig,
    pub synthesis: SynthesisConfig,
    pub selection: SelectionConfig,
    pub model: ModelConfig,
    pub ccm: CcmConfig,
    pub out: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            data: DataConfig::default(),
            seed: 0,
            workflow: Workflow::Both,
            preprocess: PreprocessConfig::default(),
            synthesis: SynthesisConfig::default(),
            selection: SelectionConfig::default(),
            model: ModelConfig::default(),
            ccm: CcmConfig::default(),
            out: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config: Self = serde_json::from_str(&text)?;
        if let Some(dir) = path.parent() {
            config.data.resolve_against(dir);
        }
        Ok(config)
    }

    /// Parameter checks plus existence of every referenced path.
    pub fn validate(&self) -> Result<()> {
        self.selection.validate()?;
        if self.model.k == 0 || self.model.k % 2 == 0 {
            return Err(Error::param(format!(
                "k must be odd and positive, got {}",
                self.model.k
            )));
        }
        let f = self.ccm.selection_fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::param(format!(
                "ccm.selection_fraction must lie in (0, 1), got {f}"
            )));
        }
        if !(self.preprocess.window_s > 0.0) {
            return Err(Error::param("preprocess.window_s must be positive"));
        }
        let d = &self.data;
        let sources = [&d.sessions, &d.windows, &d.cohort]
            .iter()
            .filter(|s| s.is_some())
            .count();
        if sources > 1 {
            return Err(Error::param(
                "set only one of data.sessions, data.windows and data.cohort",
            ));
        }
        for p in [&d.sessions, &d.windows, &d.cohort, &d.synthetic].into_iter().flatten() {
            if !p.exists() {
                return Err(Error::param(format!("referenced path {} does not exist", p.display())));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON encoding.
    pub fn sha256(&self) -> Result<String> {
        let bytes = serde_json::to_vec(self)?;
        Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
    }
}

impl DataConfig {
    fn resolve_against(&mut self, dir: &Path) {
        for p in [
            &mut self.sessions,
            &mut self.windows,
            &mut self.cohort,
            &mut self.synthetic,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }
}
