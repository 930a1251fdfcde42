//! The 62 time-domain window features and feature-matrix utilities.

mod catalog;
mod extract;
mod matrix;

pub use catalog::{catalog, FeatureCatalog, FeatureDescriptor, FeatureKind, FEATURES_PER_SENSOR, FEATURE_COUNT};
pub use extract::{
    correlation, extract, extract_matrix, iqr, kurtosis, mean, mean_crossing_rate, quantile, rms,
    signal_vector_magnitude, skewness, std_dev, FeatureVector,
};
pub use matrix::{FeatureMatrix, StandardizationStats};
