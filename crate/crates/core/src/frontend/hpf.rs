//! Second-order Butterworth high-pass prefilter.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{ConfigError, Result};

/// Biquad high-pass section, transposed direct form II.
///
/// Difference equation: `y[n] = b0 x[n] + b1 x[n-1] + b2 x[n-2] - a1 y[n-1] - a2 y[n-2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HpfState {
    cutoff_hz: f64,
    sample_rate_hz: f64,
    /// `[b0, b1, b2, a1, a2]` with `a0` normalized to 1.
    coefficients: [f64; 5],
    delay_line: [f64; 2],
}

/// Designs a Butterworth high-pass biquad (Q = 1/sqrt 2) via the bilinear
/// transform with prewarping, so the -3 dB point lands exactly on `cutoff_hz`.
pub fn design_hpf(cutoff_hz: f64, sample_rate_hz: f64) -> Result<HpfState> {
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(ConfigError::new(
            "sample_rate_hz",
            format!("must be positive, got {sample_rate_hz}"),
        )
        .into());
    }
    if !(cutoff_hz.is_finite() && cutoff_hz > 0.0 && cutoff_hz < sample_rate_hz / 2.0) {
        return Err(ConfigError::new(
            "hpf_cutoff_hz",
            format!(
                "must be in (0, {}) Hz for a {} Hz stream, got {}",
                sample_rate_hz / 2.0,
                sample_rate_hz,
                cutoff_hz
            ),
        )
        .into());
    }
    Ok(HpfState {
        cutoff_hz,
        sample_rate_hz,
        coefficients: butterworth_highpass(cutoff_hz, sample_rate_hz),
        delay_line: [0.0; 2],
    })
}

fn butterworth_highpass(cutoff_hz: f64, sample_rate_hz: f64) -> [f64; 5] {
    let omega = 2.0 * PI * cutoff_hz / sample_rate_hz;
    let (sin_w, cos_w) = omega.sin_cos();
    let alpha = sin_w / SQRT_2;
    let a0 = 1.0 + alpha;
    let b0 = (1.0 + cos_w) / 2.0;
    [
        b0 / a0,
        -(1.0 + cos_w) / a0,
        b0 / a0,
        -2.0 * cos_w / a0,
        (1.0 - alpha) / a0,
    ]
}

impl HpfState {
    pub fn cutoff_hz(&self) -> f64 {
        self.cutoff_hz
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn coefficients(&self) -> [f64; 5] {
        self.coefficients
    }

    /// Moves the cutoff while keeping the delay line, so a running stream
    /// continues without a restart.
    pub fn retune(&mut self, cutoff_hz: f64) -> Result<()> {
        let fresh = design_hpf(cutoff_hz, self.sample_rate_hz)?;
        self.cutoff_hz = fresh.cutoff_hz;
        self.coefficients = fresh.coefficients;
        Ok(())
    }

    pub fn reset(&mut self) {
        self.delay_line = [0.0; 2];
    }

    /// Magnitudes of the two poles, roots of `z^2 + a1 z + a2`.
    pub fn pole_magnitudes(&self) -> [f64; 2] {
        let [_, _, _, a1, a2] = self.coefficients;
        let disc = a1 * a1 - 4.0 * a2;
        if disc < 0.0 {
            // complex conjugate pair: |p|^2 = a2
            let m = a2.sqrt();
            [m, m]
        } else {
            let s = disc.sqrt();
            [((-a1 + s) / 2.0).abs(), ((-a1 - s) / 2.0).abs()]
        }
    }

    /// Magnitude response in dB at `freq_hz`, evaluated from the coefficients.
    pub fn response_db(&self, freq_hz: f64) -> f64 {
        let [b0, b1, b2, a1, a2] = self.coefficients;
        let w = 2.0 * PI * freq_hz / self.sample_rate_hz;
        let (s1, c1) = w.sin_cos();
        let (s2, c2) = (2.0 * w).sin_cos();
        let num_re = b0 + b1 * c1 + b2 * c2;
        let num_im = -(b1 * s1 + b2 * s2);
        let den_re = 1.0 + a1 * c1 + a2 * c2;
        let den_im = -(a1 * s1 + a2 * s2);
        let num = num_re * num_re + num_im * num_im;
        let den = den_re * den_re + den_im * den_im;
        10.0 * (num / den).log10()
    }

    #[inline]
    pub fn process_sample(&mut self, x: f64) -> f64 {
        let [b0, b1, b2, a1, a2] = self.coefficients;
        let y = b0 * x + self.delay_line[0];
        self.delay_line[0] = b1 * x - a1 * y + self.delay_line[1];
        self.delay_line[1] = b2 * x - a2 * y;
        y
    }

    pub fn process_in_place(&mut self, block: &mut [f64]) {
        for s in block.iter_mut() {
            *s = self.process_sample(*s);
        }
    }

    pub fn process(&mut self, block: &[f64]) -> Vec<f64> {
        block.iter().map(|&x| self.process_sample(x)).collect()
    }
}
