use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::signal::SensorId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Mean,
    Std,
    Rms,
    Min,
    Max,
    Iqr,
    Skewness,
    Kurtosis,
    MeanCrossingRate,
    Correlation,
    SignalVectorMagnitude,
}

impl FeatureKind {
    /// The nine per-axis statistics in catalog order.
    pub const PER_AXIS: [FeatureKind; 9] = [
        FeatureKind::Mean,
        FeatureKind::Std,
        FeatureKind::Rms,
        FeatureKind::Min,
        FeatureKind::Max,
        FeatureKind::Iqr,
        FeatureKind::Skewness,
        FeatureKind::Kurtosis,
        FeatureKind::MeanCrossingRate,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            FeatureKind::Mean => "mean",
            FeatureKind::Std => "std",
            FeatureKind::Rms => "rms",
            FeatureKind::Min => "min",
            FeatureKind::Max => "max",
            FeatureKind::Iqr => "iqr",
            FeatureKind::Skewness => "skew",
            FeatureKind::Kurtosis => "kurt",
            FeatureKind::MeanCrossingRate => "mcr",
            FeatureKind::Correlation => "corr",
            FeatureKind::SignalVectorMagnitude => "svm",
        }
    }
}

const AXES: [&str; 3] = ["x", "y", "z"];
/// Axis pairs for the correlation features.
pub const CORRELATION_PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureDescriptor {
    pub name: String,
    pub sensor: SensorId,
    pub kind: FeatureKind,
    /// Axis indices involved: one for per-axis statistics, two for
    /// correlations, none for the magnitude.
    pub axes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureCatalog {
    descriptors: Vec<FeatureDescriptor>,
}

pub const FEATURE_COUNT: usize = 62;
pub const FEATURES_PER_SENSOR: usize = 31;

impl FeatureCatalog {
    fn build() -> Self {
        let mut descriptors = Vec::with_capacity(FEATURE_COUNT);
        for sensor in [SensorId::UpperThigh, SensorId::LowerBack] {
            let p = sensor.prefix();
            for kind in FeatureKind::PER_AXIS {
                for (a, axis) in AXES.iter().enumerate() {
                    descriptors.push(FeatureDescriptor {
                        name: format!("{p}_{}_{axis}", kind.short_name()),
                        sensor,
                        kind,
                        axes: vec![a],
                    });
                }
            }
            for (a, b) in CORRELATION_PAIRS {
                descriptors.push(FeatureDescriptor {
                    name: format!("{p}_corr_{}{}", AXES[a], AXES[b]),
                    sensor,
                    kind: FeatureKind::Correlation,
                    axes: vec![a, b],
                });
            }
            descriptors.push(FeatureDescriptor {
                name: format!("{p}_svm"),
                sensor,
                kind: FeatureKind::SignalVectorMagnitude,
                axes: Vec::new(),
            });
        }
        Self { descriptors }
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn descriptors(&self) -> &[FeatureDescriptor] {
        &self.descriptors
    }

    pub fn names(&self) -> Vec<&str> {
        self.descriptors.iter().map(|d| d.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.descriptors.iter().position(|d| d.name == name)
    }
}

/// The fixed 62-feature catalog: thigh block then back block.
pub fn catalog() -> &'static FeatureCatalog {
    static CATALOG: OnceLock<FeatureCatalog> = OnceLock::new();
    CATALOG.get_or_init(FeatureCatalog::build)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let c = catalog();
        assert_eq!(c.len(), 62);
        let thigh = c
            .descriptors()
            .iter()
            .filter(|d| d.sensor == SensorId::UpperThigh)
            .count();
        assert_eq!(thigh, 31);
        let mut names = c.names();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), 62);
        assert_eq!(c.names()[0], "thigh_mean_x");
        assert_eq!(c.names()[26], "thigh_mcr_z");
        assert_eq!(c.names()[27], "thigh_corr_xy");
        assert_eq!(c.names()[30], "thigh_svm");
        assert_eq!(c.names()[31], "back_mean_x");
        assert_eq!(c.index_of("back_svm"), Some(61));
    }
}
