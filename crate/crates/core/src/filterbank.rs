//! Critical-band partition of the spectrum.
//!
//! Bins `1..N/2` are split into `M` contiguous bands whose edges are evenly
//! spaced on the Bark warp `z(f) = 13 atan(0.00076 f) + 3.5 atan((f / 7500)^2)`,
//! from the first non-DC bin up to Nyquist. Band gains are expanded back to
//! bins by linear interpolation between band centers.

use std::fmt;
use std::str::FromStr;

use crate::error::{ConfigError, Result};
use crate::frontend::Spectrum;

/// Bark value of a frequency in Hz.
pub fn bark(freq_hz: f64) -> f64 {
    13.0 * (0.00076 * freq_hz).atan() + 3.5 * (freq_hz / 7500.0).powi(2).atan()
}

fn inverse_bark(z: f64, max_hz: f64) -> f64 {
    let (mut lo, mut hi) = (0.0, max_hz);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if bark(mid) < z {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// What happens to bin 0 on resynthesis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DcPolicy {
    #[default]
    Zero,
    Pass,
}

impl FromStr for DcPolicy {
    type Err = ConfigError;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "zero" => Ok(DcPolicy::Zero),
            "pass" => Ok(DcPolicy::Pass),
            other => Err(ConfigError::new(
                "dc_policy",
                format!("expected 'zero' or 'pass', got '{other}'"),
            )),
        }
    }
}

impl fmt::Display for DcPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DcPolicy::Zero => "zero",
            DcPolicy::Pass => "pass",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BandLayout {
    frame_size: usize,
    sample_rate_hz: f64,
    /// `M + 1` ascending bin indices; band `k` covers `edges[k]..edges[k + 1]`.
    edges: Vec<usize>,
    centers_hz: Vec<f64>,
    /// Per bin `0..=N/2`: lower band index and weight of the band above it.
    interp: Vec<(usize, f64)>,
}

/// Builds an `m_bands` partition for an `n`-point transform at `sample_rate_hz`.
pub fn build_layout(n: usize, m_bands: usize, sample_rate_hz: f64) -> Result<BandLayout> {
    if n < 4 || !n.is_power_of_two() {
        return Err(ConfigError::new(
            "frame_size",
            format!("must be a power of two >= 4, got {n}"),
        )
        .into());
    }
    if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
        return Err(ConfigError::new(
            "sample_rate_hz",
            format!("must be positive, got {sample_rate_hz}"),
        )
        .into());
    }
    let half = n / 2;
    if m_bands == 0 || m_bands > half - 1 {
        return Err(ConfigError::new(
            "m_bands",
            format!(
                "{m_bands} bands do not fit a {n}-point frame (allowed 1..={})",
                half - 1
            ),
        )
        .into());
    }

    let nyquist = sample_rate_hz / 2.0;
    let z_lo = bark(sample_rate_hz / n as f64);
    let z_hi = bark(nyquist);

    // snap to bins, at least one bin per band, leave room for the rest
    let mut edges = Vec::with_capacity(m_bands + 1);
    edges.push(1usize);
    for k in 1..m_bands {
        let z = z_lo + (z_hi - z_lo) * k as f64 / m_bands as f64;
        let bin = (inverse_bark(z, nyquist) * n as f64 / sample_rate_hz).round() as usize;
        let prev = edges[k - 1];
        edges.push(bin.max(prev + 1).min(half - (m_bands - k)));
    }
    edges.push(half);

    // rounding can leave widths out of order; frequency-ordered widths restore
    // the monotone growth of critical bandwidth without changing coverage
    let mut widths: Vec<usize> = edges.windows(2).map(|w| w[1] - w[0]).collect();
    widths.sort_unstable();
    let mut acc = 1;
    for (k, w) in widths.iter().enumerate() {
        acc += w;
        edges[k + 1] = acc;
    }

    let bin_hz = sample_rate_hz / n as f64;
    let centers_bin: Vec<f64> = edges
        .windows(2)
        .map(|w| (w[0] + w[1] - 1) as f64 / 2.0)
        .collect();
    let centers_hz = centers_bin.iter().map(|c| c * bin_hz).collect();

    let interp = (0..=half)
        .map(|i| {
            let pos = i as f64;
            if pos <= centers_bin[0] {
                (0, 0.0)
            } else if pos >= centers_bin[m_bands - 1] {
                (m_bands - 1, 0.0)
            } else {
                let k = centers_bin.partition_point(|&c| c <= pos) - 1;
                let w = (pos - centers_bin[k]) / (centers_bin[k + 1] - centers_bin[k]);
                (k, w)
            }
        })
        .collect();

    Ok(BandLayout {
        frame_size: n,
        sample_rate_hz,
        edges,
        centers_hz,
        interp,
    })
}

impl BandLayout {
    pub fn m_bands(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn frame_size(&self) -> usize {
        self.frame_size
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn centers_hz(&self) -> &[f64] {
        &self.centers_hz
    }

    pub fn band_bins(&self, band: usize) -> std::ops::Range<usize> {
        self.edges[band]..self.edges[band + 1]
    }

    pub fn width(&self, band: usize) -> usize {
        self.edges[band + 1] - self.edges[band]
    }

    /// Lowest frequency covered by `band`, in Hz.
    pub fn lower_edge_hz(&self, band: usize) -> f64 {
        self.edges[band] as f64 * self.sample_rate_hz / self.frame_size as f64
    }

    /// Linear interpolation of per-band values onto bins `0..=N/2`, holding
    /// the end values flat outside the first and last band centers.
    pub fn interpolate_into(&self, band_values: &[f64], out: &mut [f64]) {
        assert_eq!(band_values.len(), self.m_bands(), "band count");
        assert_eq!(out.len(), self.interp.len(), "bin count");
        for (dst, &(k, w)) in out.iter_mut().zip(&self.interp) {
            *dst = if w == 0.0 {
                band_values[k]
            } else {
                band_values[k] + w * (band_values[k + 1] - band_values[k])
            };
        }
    }
}

/// Per-band RMS amplitudes for one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct BandSpectrum {
    pub rms: Vec<f64>,
    pub frame_index: u64,
}

/// `rms[k] = sqrt(mean of |X_i|^2 over bins i of band k)`.
pub fn band_rms_into(spectrum: &Spectrum, layout: &BandLayout, out: &mut [f64]) {
    assert_eq!(
        spectrum.frame_size(),
        layout.frame_size,
        "layout/spectrum size"
    );
    assert_eq!(out.len(), layout.m_bands(), "band count");
    for (k, dst) in out.iter_mut().enumerate() {
        let bins = layout.band_bins(k);
        let width = bins.len() as f64;
        let power: f64 = spectrum.bins[bins].iter().map(|b| b.norm_sqr()).sum();
        *dst = (power / width).sqrt();
    }
}

pub fn band_rms(spectrum: &Spectrum, layout: &BandLayout, frame_index: u64) -> BandSpectrum {
    let mut rms = vec![0.0; layout.m_bands()];
    band_rms_into(spectrum, layout, &mut rms);
    BandSpectrum { rms, frame_index }
}

/// Expands `M` band gains to `N/2 + 1` bin gains. DC is zeroed or follows the
/// first band depending on `dc_policy`; Nyquist follows the last band.
pub fn expand_gains_into(
    band_gains: &[f64],
    layout: &BandLayout,
    dc_policy: DcPolicy,
    out: &mut [f64],
) {
    layout.interpolate_into(band_gains, out);
    if dc_policy == DcPolicy::Zero {
        out[0] = 0.0;
    }
}

pub fn expand_gains(band_gains: &[f64], layout: &BandLayout, dc_policy: DcPolicy) -> Vec<f64> {
    let mut out = vec![0.0; layout.frame_size / 2 + 1];
    expand_gains_into(band_gains, layout, dc_policy, &mut out);
    out
}
