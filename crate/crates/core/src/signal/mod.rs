//! Dual-sensor accelerometer recordings: ingestion, synchronisation,
//! filtering, segmentation and a simulated cohort generator.

mod butterworth;
mod io;
mod labels;
mod segment;
mod sgolay;
pub mod simulate;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use butterworth::{highpass_zero_phase, ButterworthHighpass};
pub use io::{load_annotations, load_series, load_session, write_annotations, write_series};
pub use labels::{CoarseLabel, FineLabel};
pub use segment::segment;
pub use sgolay::{sgolay_frame_len, sgolay_smooth, SavitzkyGolay};
pub use simulate::{simulate_cohort, CohortSpec};

/// Window length in seconds used throughout the chain.
pub const WINDOW_S: f64 = 2.0;
pub const THIGH_RATE_HZ: f64 = 25.0;
pub const BACK_RATE_HZ: f64 = 128.0;
/// Samples per 2 s window on the upper thigh sensor.
pub const THIGH_WINDOW_LEN: usize = 50;
/// Samples per 2 s window on the lower back sensor.
pub const BACK_WINDOW_LEN: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorId {
    UpperThigh,
    LowerBack,
}

impl SensorId {
    pub fn nominal_rate_hz(self) -> f64 {
        match self {
            SensorId::UpperThigh => THIGH_RATE_HZ,
            SensorId::LowerBack => BACK_RATE_HZ,
        }
    }

    pub fn prefix(self) -> &'static str {
        match self {
            SensorId::UpperThigh => "thigh",
            SensorId::LowerBack => "back",
        }
    }

    pub fn window_len(self) -> usize {
        samples_for(WINDOW_S, self.nominal_rate_hz())
    }
}

/// Number of samples spanning `seconds` at `rate_hz`.
pub fn samples_for(seconds: f64, rate_hz: f64) -> usize {
    (seconds * rate_hz).round() as usize
}

/// One sensor's x/y/z acceleration stream, in g.
#[derive(Debug, Clone, PartialEq)]
pub struct TriaxialSeries<T> {
    pub sensor: SensorId,
    pub rate_hz: f64,
    /// Session-relative time of the first sample, seconds.
    pub start_time: f64,
    pub samples: Vec<[T; 3]>,
}

impl<T: Real> TriaxialSeries<T> {
    pub fn new(sensor: SensorId, rate_hz: f64, start_time: f64, samples: Vec<[T; 3]>) -> Result<Self> {
        if !(rate_hz > 0.0 && rate_hz.is_finite()) {
            return Err(Error::param(format!("sampling rate must be positive, got {rate_hz}")));
        }
        if samples.is_empty() {
            return Err(Error::Format("empty series".into()));
        }
        if let Some(i) = samples.iter().position(|s| s.iter().any(|v| !v.is_finite())) {
            return Err(Error::Format(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            sensor,
            rate_hz,
            start_time,
            samples,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time just past the last sample.
    pub fn end_time(&self) -> f64 {
        self.start_time + self.len() as f64 / self.rate_hz
    }

    pub fn axis(&self, a: usize) -> Vec<T> {
        self.samples.iter().map(|s| s[a]).collect()
    }

    /// Rebuilds a series from three axis vectors of equal length.
    pub fn with_axes(&self, axes: [Vec<T>; 3]) -> Self {
        let samples = (0..axes[0].len())
            .map(|i| [axes[0][i], axes[1][i], axes[2][i]])
            .collect();
        Self {
            samples,
            ..self.clone()
        }
    }

    /// Index of the sample at absolute time `t`, if inside the stream.
    pub fn index_at(&self, t: f64) -> Option<usize> {
        let idx = ((t - self.start_time) * self.rate_hz).round();
        (idx >= 0.0 && (idx as usize) < self.len()).then_some(idx as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub label: FineLabel,
}

/// Gold-standard activity annotations: sorted, non-overlapping intervals.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AnnotationTrack {
    intervals: Vec<Interval>,
}

impl AnnotationTrack {
    pub fn new(mut intervals: Vec<Interval>) -> Result<Self> {
        for iv in &intervals {
            if !(iv.start.is_finite() && iv.end.is_finite() && iv.start < iv.end) {
                return Err(Error::Format(format!(
                    "annotation interval [{}, {}) must have start < end",
                    iv.start, iv.end
                )));
            }
        }
        intervals.sort_by(|a, b| a.start.total_cmp(&b.start));
        for pair in intervals.windows(2) {
            if pair[1].start < pair[0].end {
                return Err(Error::Format(format!(
                    "overlapping annotations: [{}, {}) {} and [{}, {}) {}",
                    pair[0].start, pair[0].end, pair[0].label, pair[1].start, pair[1].end, pair[1].label
                )));
            }
        }
        Ok(Self { intervals })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Start of the first sit-to-stand transfer; the synchronisation anchor.
    pub fn first_sit_to_stand(&self) -> Option<f64> {
        self.intervals
            .iter()
            .find(|iv| iv.label == FineLabel::SitToStand)
            .map(|iv| iv.start)
    }

    /// The interval that fully covers `[start, end)`, if any.
    pub fn covering(&self, start: f64, end: f64) -> Option<&Interval> {
        const EPS: f64 = 1e-9;
        self.intervals
            .iter()
            .find(|iv| iv.start <= start + EPS && iv.end >= end - EPS)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordingSession<T> {
    pub participant_id: String,
    pub thigh: TriaxialSeries<T>,
    pub back: TriaxialSeries<T>,
    pub annotations: AnnotationTrack,
}

impl<T: Real> RecordingSession<T> {
    /// First instant covered by both sensor streams; window tiling starts here.
    pub fn origin(&self) -> f64 {
        self.thigh.start_time.max(self.back.start_time)
    }

    pub fn end(&self) -> f64 {
        self.thigh.end_time().min(self.back.end_time())
    }

    pub fn map_series(&self, f: impl Fn(&TriaxialSeries<T>) -> Result<TriaxialSeries<T>>) -> Result<Self> {
        Ok(Self {
            participant_id: self.participant_id.clone(),
            thigh: f(&self.thigh)?,
            back: f(&self.back)?,
            annotations: self.annotations.clone(),
        })
    }
}

/// Re-bases both streams so the given event times (each in its own stream's
/// clock) coincide with the start of the first annotated sit-to-stand.
pub fn synchronize<T: Real>(
    session: &RecordingSession<T>,
    thigh_event_s: f64,
    back_event_s: f64,
) -> Result<RecordingSession<T>> {
    let anchor = session
        .annotations
        .first_sit_to_stand()
        .ok_or_else(|| Error::Format("no sit_to_stand annotation to synchronise on".into()))?;
    let check = |series: &TriaxialSeries<T>, t: f64| {
        if t < series.start_time || t >= series.end_time() || !t.is_finite() {
            Err(Error::Range(format!(
                "{:?} event at {t} s outside stream span [{}, {})",
                series.sensor,
                series.start_time,
                series.end_time()
            )))
        } else {
            Ok(())
        }
    };
    check(&session.thigh, thigh_event_s)?;
    check(&session.back, back_event_s)?;
    let mut out = session.clone();
    out.thigh.start_time += anchor - thigh_event_s;
    out.back.start_time += anchor - back_event_s;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Real,
    Synthetic,
}

impl Origin {
    pub fn as_str(self) -> &'static str {
        match self {
            Origin::Real => "real",
            Origin::Synthetic => "synthetic",
        }
    }
}

/// A synchronised 2 s pair of sensor slices carrying one activity label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledWindow<T> {
    pub participant_id: String,
    pub label: FineLabel,
    /// Session-relative start time; synthetic windows use their draw offset.
    pub start_s: f64,
    pub thigh: Vec<[T; 3]>,
    pub back: Vec<[T; 3]>,
    pub origin: Origin,
}

impl<T: Real> LabeledWindow<T> {
    pub fn new(
        participant_id: impl Into<String>,
        label: FineLabel,
        start_s: f64,
        thigh: Vec<[T; 3]>,
        back: Vec<[T; 3]>,
        origin: Origin,
    ) -> Result<Self> {
        let w = Self {
            participant_id: participant_id.into(),
            label,
            start_s,
            thigh,
            back,
            origin,
        };
        w.validate()?;
        Ok(w)
    }

    /// Checks the fixed 50/256 slice lengths and finiteness.
    pub fn validate(&self) -> Result<()> {
        if self.thigh.len() != THIGH_WINDOW_LEN || self.back.len() != BACK_WINDOW_LEN {
            return Err(Error::Format(format!(
                "window slices must be {THIGH_WINDOW_LEN} thigh and {BACK_WINDOW_LEN} back samples, got {} and {}",
                self.thigh.len(),
                self.back.len()
            )));
        }
        let finite = |s: &[[T; 3]]| s.iter().all(|v| v.iter().all(|x| x.is_finite()));
        if !finite(&self.thigh) || !finite(&self.back) {
            return Err(Error::Format("non-finite sample in window".into()));
        }
        Ok(())
    }

    pub fn slice(&self, sensor: SensorId) -> &[[T; 3]] {
        match sensor {
            SensorId::UpperThigh => &self.thigh,
            SensorId::LowerBack => &self.back,
        }
    }

    /// Channel `c` in 0..6: thigh x/y/z then back x/y/z.
    pub fn channel(&self, c: usize) -> Vec<T> {
        let (slice, axis) = if c < 3 { (&self.thigh, c) } else { (&self.back, c - 3) };
        slice.iter().map(|s| s[axis]).collect()
    }
}
