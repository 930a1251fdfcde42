//! Butterworth high-pass design (bilinear transform, second-order sections)
//! and zero-phase forward–backward application.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::TriaxialSeries;

#[derive(Debug, Clone, Copy)]
struct Section {
    b: [f64; 3],
    a: [f64; 3],
}

impl Section {
    fn dc_gain(&self) -> f64 {
        (self.b[0] + self.b[1] + self.b[2]) / (self.a[0] + self.a[1] + self.a[2])
    }

    /// Transposed direct-form II state reached after a long constant input of 1.
    fn step_state(&self) -> [f64; 2] {
        let g = self.dc_gain();
        let z2 = self.b[2] - self.a[2] * g;
        let z1 = self.b[1] - self.a[1] * g + z2;
        [z1, z2]
    }

    fn response(&self, z_inv: Complex64) -> Complex64 {
        let num = self.b[0] + self.b[1] * z_inv + self.b[2] * z_inv * z_inv;
        let den = self.a[0] + self.a[1] * z_inv + self.a[2] * z_inv * z_inv;
        num / den
    }
}

#[derive(Debug, Clone)]
pub struct ButterworthHighpass {
    order: usize,
    sections: Vec<Section>,
}

impl ButterworthHighpass {
    pub fn new(order: usize, cutoff_hz: f64, rate_hz: f64) -> Result<Self> {
        if order == 0 {
            return Err(Error::param("filter order must be at least 1"));
        }
        if !(cutoff_hz > 0.0 && cutoff_hz < rate_hz / 2.0) {
            return Err(Error::param(format!(
                "cutoff {cutoff_hz} Hz must lie in (0, Nyquist = {} Hz)",
                rate_hz / 2.0
            )));
        }
        let fs2 = 2.0 * rate_hz;
        let warped = fs2 * (std::f64::consts::PI * cutoff_hz / rate_hz).tan();
        let n = order as f64;
        let digital_pole = |k: usize| {
            let theta = std::f64::consts::PI * (2.0 * k as f64 + n - 1.0) / (2.0 * n);
            let proto = Complex64::from_polar(1.0, theta);
            let s = warped / proto;
            (fs2 + s) / (fs2 - s)
        };
        let mut sections = Vec::with_capacity(order.div_ceil(2));
        for k in 1..=order / 2 {
            let z = digital_pole(k);
            let a = [1.0, -2.0 * z.re, z.norm_sqr()];
            let g = (a[0] - a[1] + a[2]) / 4.0;
            sections.push(Section { b: [g, -2.0 * g, g], a });
        }
        if order % 2 == 1 {
            let z = digital_pole(order.div_ceil(2)).re;
            let g = (1.0 + z) / 2.0;
            sections.push(Section {
                b: [g, -g, 0.0],
                a: [1.0, -z, 0.0],
            });
        }
        Ok(Self { order, sections })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Magnitude response of a single causal pass at `freq_hz`.
    pub fn magnitude(&self, freq_hz: f64, rate_hz: f64) -> f64 {
        let w = 2.0 * std::f64::consts::PI * freq_hz / rate_hz;
        let z_inv = Complex64::from_polar(1.0, -w);
        self.sections
            .iter()
            .map(|s| s.response(z_inv))
            .fold(Complex64::new(1.0, 0.0), |acc, h| acc * h)
            .norm()
    }

    /// Causal cascade, with states initialised to the steady state for `x[0]`.
    fn run(&self, x: &mut [f64]) {
        let mut scale = x.first().copied().unwrap_or(0.0);
        for s in &self.sections {
            let [mut z1, mut z2] = s.step_state().map(|v| v * scale);
            scale *= s.dc_gain();
            for v in x.iter_mut() {
                let input = *v;
                let y = s.b[0] * input + z1;
                z1 = s.b[1] * input - s.a[1] * y + z2;
                z2 = s.b[2] * input - s.a[2] * y;
                *v = y;
            }
        }
    }

    fn forward_backward(&self, x: &[f64]) -> Vec<f64> {
        let n = x.len();
        let pad = (3 * self.order).min(n.saturating_sub(1));
        let mut ext = Vec::with_capacity(n + 2 * pad);
        // Odd reflection about the end points.
        ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
        ext.extend_from_slice(x);
        ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));
        self.run(&mut ext);
        ext.reverse();
        self.run(&mut ext);
        ext.reverse();
        ext[pad..pad + n].to_vec()
    }

    /// Zero-phase filtering. The forward–backward and backward–forward passes
    /// are averaged, so the operator commutes exactly with time reversal.
    pub fn filter_zero_phase<T: Real>(&self, x: &[T]) -> Vec<T> {
        if x.is_empty() {
            return Vec::new();
        }
        let xs: Vec<f64> = x.iter().map(|v| v.as_f64()).collect();
        let fb = self.forward_backward(&xs);
        let rev: Vec<f64> = xs.iter().rev().copied().collect();
        let bf = self.forward_backward(&rev);
        fb.iter()
            .zip(bf.iter().rev())
            .map(|(a, b)| T::lit(0.5 * (a + b)))
            .collect()
    }
}

/// Zero-phase Butterworth high-pass on each axis (defaults: 0.5 Hz, order 4).
pub fn highpass_zero_phase<T: Real>(
    series: &TriaxialSeries<T>,
    cutoff_hz: f64,
    order: usize,
) -> Result<TriaxialSeries<T>> {
    let filter = ButterworthHighpass::new(order, cutoff_hz, series.rate_hz)?;
    let axes = [0, 1, 2].map(|a| filter.filter_zero_phase(&series.axis(a)));
    Ok(series.with_axes(axes))
}
