//! On-disk layout for window sets: one `<label>.csv` per activity in long
//! format (`window_id,channel,sample_index,value`) plus `manifest.json`.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::signal::{FineLabel, LabeledWindow, Origin, BACK_WINDOW_LEN, THIGH_WINDOW_LEN};

const CHANNELS: [&str; 6] = ["thigh_x", "thigh_y", "thigh_z", "back_x", "back_y", "back_z"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowRecord {
    pub window_id: usize,
    pub participant_id: String,
    pub label: FineLabel,
    pub start_s: f64,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoreManifest {
    pub seed: u64,
    /// Free-form configuration snapshot of the stage that produced the set.
    pub config: serde_json::Value,
    pub counts: BTreeMap<FineLabel, usize>,
    pub windows: Vec<WindowRecord>,
}

#[derive(Debug, Clone)]
pub struct WindowStore {
    dir: PathBuf,
}

#[derive(Serialize, Deserialize)]
struct Row {
    window_id: usize,
    channel: String,
    sample_index: usize,
    value: f64,
}

impl WindowStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write<T: Real>(
        &self,
        windows: &[LabeledWindow<T>],
        seed: u64,
        config: serde_json::Value,
    ) -> Result<StoreManifest> {
        std::fs::create_dir_all(&self.dir).map_err(|e| Error::io(&self.dir, e))?;
        let mut counts = BTreeMap::new();
        let mut writers: BTreeMap<FineLabel, csv::Writer<std::fs::File>> = BTreeMap::new();
        let mut records = Vec::with_capacity(windows.len());
        for (id, w) in windows.iter().enumerate() {
            *counts.entry(w.label).or_insert(0) += 1;
            records.push(WindowRecord {
                window_id: id,
                participant_id: w.participant_id.clone(),
                label: w.label,
                start_s: w.start_s,
                origin: w.origin,
            });
            if !writers.contains_key(&w.label) {
                let path = self.dir.join(format!("{}.csv", w.label.as_str()));
                let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
                writers.insert(w.label, csv::Writer::from_writer(file));
            }
            let wtr = writers.get_mut(&w.label).expect("writer inserted above");
            for (c, name) in CHANNELS.iter().enumerate() {
                for (i, v) in w.channel(c).into_iter().enumerate() {
                    wtr.serialize(Row {
                        window_id: id,
                        channel: (*name).to_string(),
                        sample_index: i,
                        value: v.as_f64(),
                    })?;
                }
            }
        }
        for (_, mut wtr) in writers {
            wtr.flush().map_err(|e| Error::io(&self.dir, e))?;
        }
        let manifest = StoreManifest {
            seed,
            config,
            counts,
            windows: records,
        };
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&manifest)?).map_err(|e| Error::io(&path, e))?;
        Ok(manifest)
    }

    pub fn manifest(&self) -> Result<StoreManifest> {
        let path = self.dir.join("manifest.json");
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Reads every window back in manifest order.
    pub fn read<T: Real>(&self) -> Result<(StoreManifest, Vec<LabeledWindow<T>>)> {
        let manifest = self.manifest()?;
        let mut thigh: BTreeMap<usize, Vec<[T; 3]>> = BTreeMap::new();
        let mut back: BTreeMap<usize, Vec<[T; 3]>> = BTreeMap::new();
        for label in manifest.counts.keys() {
            let path = self.dir.join(format!("{}.csv", label.as_str()));
            let mut rdr = csv::Reader::from_path(&path)?;
            for (line, row) in rdr.deserialize::<Row>().enumerate() {
                let row = row?;
                let c = CHANNELS
                    .iter()
                    .position(|n| *n == row.channel)
                    .ok_or_else(|| Error::Parse {
                        path: path.clone(),
                        line: line + 2,
                        message: format!("unknown channel `{}`", row.channel),
                    })?;
                let (map, len, axis) = if c < 3 {
                    (&mut thigh, THIGH_WINDOW_LEN, c)
                } else {
                    (&mut back, BACK_WINDOW_LEN, c - 3)
                };
                let slot = map.entry(row.window_id).or_insert_with(|| vec![[T::zero(); 3]; len]);
                if row.sample_index >= len {
                    return Err(Error::Parse {
                        path: path.clone(),
                        line: line + 2,
                        message: format!("sample_index {} out of range", row.sample_index),
                    });
                }
                slot[row.sample_index][axis] = T::lit(row.value);
            }
        }
        let windows = manifest
            .windows
            .iter()
            .map(|r| {
                let missing = || Error::Format(format!("window {} missing from store", r.window_id));
                LabeledWindow::new(
                    r.participant_id.clone(),
                    r.label,
                    r.start_s,
                    thigh.remove(&r.window_id).ok_or_else(missing)?,
                    back.remove(&r.window_id).ok_or_else(missing)?,
                    r.origin,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((manifest, windows))
    }
}
