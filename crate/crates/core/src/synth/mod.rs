//! Synthetic window generation: DTW, DTW barycentre averaging, participant
//! sampling and count-matched per-activity synthesis.

mod dba;
mod dtw;
mod generate;
mod sampling;
mod store;

pub use dba::{dba, dba_from, dba_trace, medoid_index, BarycenterConfig, DbaInit, DbaOutcome};
pub use dtw::{dtw, dtw_cost, Alignment, WarpingPath};
pub use generate::{
    generate_synthetic, synthesize_dataset, Excerpt, ParticipantPool, SynthesisConfig, SynthesisPlan, WindowPolicy,
};
pub use sampling::{sample_windows, SamplingRule};
pub use store::{StoreManifest, WindowRecord, WindowStore};
