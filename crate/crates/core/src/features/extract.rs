use rayon::prelude::*;

use crate::scalar::Real;
use crate::signal::{ButterworthHighpass, FineLabel, LabeledWindow, Origin, SensorId};

use super::catalog::{CORRELATION_PAIRS, FEATURES_PER_SENSOR, FEATURE_COUNT};
use super::matrix::FeatureMatrix;

/// Cutoff and order of the high-pass applied before the magnitude feature.
pub const SVM_HIGHPASS_HZ: f64 = 0.5;
pub const SVM_HIGHPASS_ORDER: usize = 4;

/// The 62 feature values of one window, in catalog order.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T> {
    pub values: Vec<T>,
    pub participant_id: String,
    pub label: FineLabel,
    pub origin: Origin,
}

pub fn mean<T: Real>(a: &[T]) -> T {
    a.iter().copied().sum::<T>() / T::lit(a.len() as f64)
}

/// Sample standard deviation (N − 1 denominator). Exactly 0 for constant
/// input, where rounding in the mean would otherwise leave a tiny residue.
pub fn std_dev<T: Real>(a: &[T]) -> T {
    if a.len() < 2 || a.iter().all(|&v| v == a[0]) {
        return T::zero();
    }
    let m = mean(a);
    let ss: T = a.iter().map(|&v| (v - m) * (v - m)).sum();
    (ss / T::lit((a.len() - 1) as f64)).sqrt()
}

pub fn rms<T: Real>(a: &[T]) -> T {
    (a.iter().map(|&v| v * v).sum::<T>() / T::lit(a.len() as f64)).sqrt()
}

/// Linear interpolation between closest ranks at `h = (n − 1)·p`.
pub fn quantile<T: Real>(sorted: &[T], p: f64) -> T {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (sorted[hi] - sorted[lo]) * T::lit(h - lo as f64)
}

pub fn iqr<T: Real>(a: &[T]) -> T {
    let mut s = a.to_vec();
    s.sort_by(|x, y| x.partial_cmp(y).expect("finite samples"));
    quantile(&s, 0.75) - quantile(&s, 0.25)
}

fn standardized_moment<T: Real>(a: &[T], power: i32) -> T {
    let sd = std_dev(a);
    if sd == T::zero() {
        return T::zero();
    }
    let m = mean(a);
    let num: T = a.iter().map(|&v| (v - m).powi(power)).sum();
    num / (T::lit((a.len() - 1) as f64) * sd.powi(power))
}

/// Σ(a − μ)³ / ((N − 1)σ³), 0 for constant input.
pub fn skewness<T: Real>(a: &[T]) -> T {
    standardized_moment(a, 3)
}

/// Σ(a − μ)⁴ / ((N − 1)σ⁴), 0 for constant input.
pub fn kurtosis<T: Real>(a: &[T]) -> T {
    standardized_moment(a, 4)
}

fn sgn<T: Real>(v: T) -> T {
    if v > T::zero() {
        T::one()
    } else if v < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// ½ Σ |sgn(aᵢ − μ) − sgn(aᵢ₋₁ − μ)| with sgn(0) = 0.
pub fn mean_crossing_rate<T: Real>(a: &[T]) -> T {
    let m = mean(a);
    let total: T = a.windows(2).map(|w| (sgn(w[1] - m) - sgn(w[0] - m)).abs()).sum();
    total * T::lit(0.5)
}

/// Pearson correlation; 0 when either input is constant.
pub fn correlation<T: Real>(a: &[T], b: &[T]) -> T {
    let (sa, sb) = (std_dev(a), std_dev(b));
    if sa == T::zero() || sb == T::zero() {
        return T::zero();
    }
    let (ma, mb) = (mean(a), mean(b));
    let cov: T = a.iter().zip(b).map(|(&x, &y)| (x - ma) * (y - mb)).sum::<T>() / T::lit((a.len() - 1) as f64);
    (cov / (sa * sb)).max(-T::one()).min(T::one())
}

/// Mean Euclidean norm of the zero-phase high-passed samples.
pub fn signal_vector_magnitude<T: Real>(slice: &[[T; 3]], rate_hz: f64) -> T {
    let filter = ButterworthHighpass::new(SVM_HIGHPASS_ORDER, SVM_HIGHPASS_HZ, rate_hz).expect("valid svm filter");
    let axes: Vec<Vec<T>> = (0..3)
        .map(|a| filter.filter_zero_phase(&slice.iter().map(|s| s[a]).collect::<Vec<_>>()))
        .collect();
    let total: T = (0..slice.len())
        .map(|i| (axes[0][i] * axes[0][i] + axes[1][i] * axes[1][i] + axes[2][i] * axes[2][i]).sqrt())
        .sum();
    total / T::lit(slice.len() as f64)
}

fn sensor_features<T: Real>(slice: &[[T; 3]], sensor: SensorId, out: &mut Vec<T>) {
    let axes: Vec<Vec<T>> = (0..3).map(|a| slice.iter().map(|s| s[a]).collect()).collect();
    let per_axis: [fn(&[T]) -> T; 9] = [
        mean,
        std_dev,
        rms,
        |a| a.iter().copied().fold(T::infinity(), T::min),
        |a| a.iter().copied().fold(T::neg_infinity(), T::max),
        iqr,
        skewness,
        kurtosis,
        mean_crossing_rate,
    ];
    for f in per_axis {
        for axis in &axes {
            out.push(f(axis));
        }
    }
    for (a, b) in CORRELATION_PAIRS {
        out.push(correlation(&axes[a], &axes[b]));
    }
    out.push(signal_vector_magnitude(slice, sensor.nominal_rate_hz()));
}

pub fn extract<T: Real>(window: &LabeledWindow<T>) -> FeatureVector<T> {
    let mut values = Vec::with_capacity(FEATURE_COUNT);
    sensor_features(&window.thigh, SensorId::UpperThigh, &mut values);
    debug_assert_eq!(values.len(), FEATURES_PER_SENSOR);
    sensor_features(&window.back, SensorId::LowerBack, &mut values);
    FeatureVector {
        values,
        participant_id: window.participant_id.clone(),
        label: window.label,
        origin: window.origin,
    }
}

/// Row i is `extract(&windows[i])`; rows are computed in parallel.
pub fn extract_matrix<T: Real>(windows: &[LabeledWindow<T>]) -> FeatureMatrix {
    let rows: Vec<FeatureVector<f64>> = windows
        .par_iter()
        .map(|w| {
            let v = extract(w);
            FeatureVector {
                values: v.values.into_iter().map(Real::as_f64).collect(),
                participant_id: v.participant_id,
                label: v.label,
                origin: v.origin,
            }
        })
        .collect();
    FeatureMatrix::from_vectors(rows)
}
