//! Savitzky–Golay least-squares polynomial smoothing.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::TriaxialSeries;

/// Frame length in samples: `round(frame_s * rate_hz)`, raised to the next
/// odd integer and to at least `order + 1`.
pub fn sgolay_frame_len(frame_s: f64, rate_hz: f64, order: usize) -> usize {
    let mut frame = (frame_s * rate_hz).round().max(1.0) as usize;
    if frame < order + 1 {
        frame = order + 1;
    }
    if frame % 2 == 0 {
        frame += 1;
    }
    frame
}

/// Precomputed smoothing operator for one (frame, order) pair.
#[derive(Debug, Clone)]
pub struct SavitzkyGolay {
    frame: usize,
    order: usize,
    /// Row `r` evaluates the local fit at frame position `r`.
    projection: Vec<Vec<f64>>,
}

impl SavitzkyGolay {
    pub fn new(frame: usize, order: usize) -> Result<Self> {
        if frame % 2 == 0 || frame < order + 1 {
            return Err(Error::param(format!(
                "Savitzky-Golay frame must be odd and >= order + 1 (frame {frame}, order {order})"
            )));
        }
        let projection = if frame == order + 1 {
            // Interpolating fit: every sample is reproduced exactly.
            (0..frame)
                .map(|r| (0..frame).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
                .collect()
        } else {
            let half = (frame / 2) as f64;
            let vandermonde = DMatrix::from_fn(frame, order + 1, |i, j| {
                let u = (i as f64 - half) / half.max(1.0);
                u.powi(j as i32)
            });
            let q = vandermonde.qr().q();
            let hat = &q * q.transpose();
            (0..frame).map(|r| (0..frame).map(|c| hat[(r, c)]).collect()).collect()
        };
        Ok(Self {
            frame,
            order,
            projection,
        })
    }

    pub fn frame(&self) -> usize {
        self.frame
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Convolution weights applied to interior samples.
    pub fn central_coefficients(&self) -> &[f64] {
        &self.projection[self.frame / 2]
    }

    /// Steady-state gain of the interior smoother for a sinusoid at `freq_hz`.
    pub fn gain(&self, freq_hz: f64, rate_hz: f64) -> f64 {
        let half = (self.frame / 2) as f64;
        self.central_coefficients()
            .iter()
            .enumerate()
            .map(|(k, c)| c * (2.0 * std::f64::consts::PI * freq_hz * (k as f64 - half) / rate_hz).cos())
            .sum()
    }

    pub fn apply<T: Real>(&self, x: &[T]) -> Result<Vec<T>> {
        let n = x.len();
        let w = self.frame;
        if n < w {
            return Err(Error::param(format!(
                "series of {n} samples is shorter than the smoothing frame ({w})"
            )));
        }
        let m = w / 2;
        let dot =
            |row: &[f64], seg: &[T]| -> T { T::lit(row.iter().zip(seg).map(|(c, v)| c * v.as_f64()).sum::<f64>()) };
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let v = if j < m {
                dot(&self.projection[j], &x[..w])
            } else if j + m >= n {
                dot(&self.projection[w - (n - j)], &x[n - w..])
            } else {
                dot(&self.projection[m], &x[j - m..j + m + 1])
            };
            out.push(v);
        }
        Ok(out)
    }
}

/// Smooths each axis with a Savitzky–Golay filter (defaults: 0.12 s, order 2).
pub fn sgolay_smooth<T: Real>(series: &TriaxialSeries<T>, frame_s: f64, order: usize) -> Result<TriaxialSeries<T>> {
    let frame = sgolay_frame_len(frame_s, series.rate_hz, order);
    let filter = SavitzkyGolay::new(frame, order)?;
    let axes = [
        filter.apply(&series.axis(0))?,
        filter.apply(&series.axis(1))?,
        filter.apply(&series.axis(2))?,
    ];
    Ok(series.with_axes(axes))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::SensorId;
    use proptest::prelude::*;

    /// Independent oracle: solve the normal equations of a local polynomial
    /// fit by Gaussian elimination and evaluate at `at`.
    fn local_fit(y: &[f64], order: usize, at: usize) -> f64 {
        let p = order + 1;
        let mut a = vec![vec![0.0; p + 1]; p];
        for (i, &yi) in y.iter().enumerate() {
            let t = i as f64;
            for r in 0..p {
                for c in 0..p {
                    a[r][c] += t.powi((r + c) as i32);
                }
                a[r][p] += yi * t.powi(r as i32);
            }
        }
        for col in 0..p {
            let piv = (col..p)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            a.swap(col, piv);
            for r in 0..p {
                if r != col {
                    let f = a[r][col] / a[col][col];
                    for c in col..=p {
                        a[r][c] -= f * a[col][c];
                    }
                }
            }
        }
        let coef: Vec<f64> = (0..p).map(|r| a[r][p] / a[r][r]).collect();
        coef.iter()
            .enumerate()
            .map(|(k, c)| c * (at as f64).powi(k as i32))
            .sum()
    }

    #[test]
    fn frame_lengths_for_both_sensors() {
        assert_eq!(sgolay_frame_len(0.12, 25.0, 2), 3);
        assert_eq!(sgolay_frame_len(0.12, 128.0, 2), 15);
        assert_eq!(sgolay_frame_len(0.01, 25.0, 2), 3);
        assert_eq!(sgolay_frame_len(0.16, 25.0, 2), 5);
    }

    #[test]
    fn constant_series_unchanged() {
        let s = TriaxialSeries::new(SensorId::LowerBack, 128.0, 0.0, vec![[0.5f64; 3]; 64]).unwrap();
        let out = sgolay_smooth(&s, 0.12, 2).unwrap();
        for (a, b) in out.samples.iter().zip(&s.samples) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn thigh_frame_is_identity() {
        let samples: Vec<[f64; 3]> = (0..40).map(|i| [(i as f64).sin(), (i * i) as f64, -1.0]).collect();
        let s = TriaxialSeries::new(SensorId::UpperThigh, 25.0, 0.0, samples).unwrap();
        assert_eq!(sgolay_smooth(&s, 0.12, 2).unwrap(), s);
    }

    #[test]
    fn impulse_response_matches_local_least_squares() {
        let f = SavitzkyGolay::new(15, 2).unwrap();
        let mut x = vec![0.0f64; 31];
        x[15] = 1.0;
        let y = f.apply(&x).unwrap();
        let window = &x[8..23];
        let oracle = local_fit(window, 2, 7);
        assert!((y[15] - oracle).abs() < 1e-12);
        // Classical closed form for the 15-point quadratic centre weight.
        assert!((f.central_coefficients()[7] - 167.0 / 1105.0).abs() < 1e-12);
    }

    #[test]
    fn edges_match_terminal_frame_fit() {
        let f = SavitzkyGolay::new(7, 2).unwrap();
        let x: Vec<f64> = (0..20).map(|i| ((i * 37 % 11) as f64).sqrt()).collect();
        let y = f.apply(&x).unwrap();
        for j in 0..3 {
            assert!((y[j] - local_fit(&x[..7], 2, j)).abs() < 1e-10);
            let k = 19 - j;
            assert!((y[k] - local_fit(&x[13..], 2, 6 - j)).abs() < 1e-10);
        }
        for j in 3..17 {
            assert!((y[j] - local_fit(&x[j - 3..j + 4], 2, 3)).abs() < 1e-10);
        }
    }

    #[test]
    fn gain_matches_interior_sinusoid_response() {
        let f = SavitzkyGolay::new(15, 2).unwrap();
        assert!((f.gain(0.0, 128.0) - 1.0).abs() < 1e-12);
        let w = 2.0 * std::f64::consts::PI * 4.5 / 128.0;
        let x: Vec<f64> = (0..256).map(|i| (w * i as f64).cos()).collect();
        let y = f.apply(&x).unwrap();
        let g = f.gain(4.5, 128.0);
        assert!(g < 1.0);
        for i in 7..249 {
            assert!((y[i] - g * x[i]).abs() < 1e-12, "sample {i}");
        }
    }

    #[test]
    fn short_series_is_rejected() {
        let f = SavitzkyGolay::new(15, 2).unwrap();
        assert!(f.apply(&[0.0f64; 10]).is_err());
        assert!(SavitzkyGolay::new(4, 2).is_err());
        assert!(SavitzkyGolay::new(3, 3).is_err());
    }

    proptest! {
        #[test]
        fn reproduces_quadratics(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, n in 15usize..80) {
            let f = SavitzkyGolay::new(15, 2).unwrap();
            let t = |i: usize| i as f64 / 128.0;
            let x: Vec<f64> = (0..n).map(|i| a + b * t(i) + c * t(i) * t(i)).collect();
            let y = f.apply(&x).unwrap();
            let scale = x.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for (u, v) in x.iter().zip(&y) {
                prop_assert!((u - v).abs() <= 1e-12 * scale);
            }
        }
    }
}
