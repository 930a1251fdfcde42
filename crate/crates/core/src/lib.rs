//! Activity recognition chain for dual-accelerometer wearables.
//!
//! The crate covers preprocessing ([`signal`]), DTW barycentre synthesis
//! ([`synth`]), window features ([`features`]), the heterogeneous feature
//! selection ensemble ([`selection`]), KNN classification ([`model`]) and
//! leave-one-subject-out evaluation ([`eval`]); [`pipeline`] ties them into
//! the feature-intervention and control-condition workflows.
//!
//! Signal, warping and feature code is generic over [`Real`] (`f32`/`f64`);
//! the aliases below fix the scalar to `f64` as used by the pipeline.

pub mod error;
pub mod eval;
pub mod features;
pub mod model;
pub mod pipeline;
pub mod rng;
pub mod scalar;
pub mod selection;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::Real;

pub type TriaxialSeries = signal::TriaxialSeries<f64>;
pub type RecordingSession = signal::RecordingSession<f64>;
pub type LabeledWindow = signal::LabeledWindow<f64>;
pub type LabeledWindowF32 = signal::LabeledWindow<f32>;
