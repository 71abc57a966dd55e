//! Per-band noise floor estimation without voice activity detection.
//!
//! Band levels are recursively smoothed in the power domain, their minimum
//! over a sliding window of a few seconds is tracked with sub-window minima,
//! the minimum is lifted by a bias factor derived from the expected spread of
//! the smoothed level, and the result is smoothed once more over time:
//! `W(m) = W(m-1) + alpha * (W'(m) - W(m-1))`.

use crate::error::{ConfigError, Result};

/// Default number of sub-windows the tracking window is split into.
pub const DEFAULT_SUB_WINDOWS: usize = 8;

/// First-order recursive smoothing of band power, reported as RMS amplitude.
#[derive(Debug, Clone)]
pub struct LevelSmoother {
    factor: f64,
    power: Vec<f64>,
    level: Vec<f64>,
    initialized: bool,
}

impl LevelSmoother {
    pub fn new(m_bands: usize, factor: f64) -> Self {
        Self {
            factor,
            power: vec![0.0; m_bands],
            level: vec![0.0; m_bands],
            initialized: false,
        }
    }

    pub fn set_factor(&mut self, factor: f64) {
        self.factor = factor;
    }

    pub fn update(&mut self, rms: &[f64]) -> &[f64] {
        assert_eq!(rms.len(), self.power.len(), "band count");
        let a = self.factor;
        for ((p, l), &z) in self.power.iter_mut().zip(&mut self.level).zip(rms) {
            let zz = z * z;
            *p = if self.initialized {
                a * *p + (1.0 - a) * zz
            } else {
                zz
            };
            *l = p.sqrt();
        }
        self.initialized = true;
        &self.level
    }

    pub fn level(&self) -> &[f64] {
        &self.level
    }
}

/// Sliding-window minimum built from `U` sub-window minima.
///
/// The reported minimum covers the current partial sub-window plus the
/// `U - 1` completed ones before it. On the frame that completes a sub-window
/// it therefore covers exactly the last `U * V` frames; between boundaries it
/// covers between `(U - 1) * V + 1` and `U * V` frames.
#[derive(Debug, Clone)]
pub struct MinTracker {
    m_bands: usize,
    sub_windows: usize,
    frames_per_sub_window: usize,
    /// `(U - 1) * M` completed sub-window minima, oldest slot at `ring_pos`.
    ring: Vec<f64>,
    ring_pos: usize,
    current: Vec<f64>,
    count: usize,
    initialized: bool,
}

impl MinTracker {
    pub fn new(m_bands: usize, sub_windows: usize, frames_per_sub_window: usize) -> Result<Self> {
        if sub_windows == 0 || frames_per_sub_window == 0 {
            return Err(ConfigError::new(
                "tracker_window_seconds",
                format!(
                    "tracker needs at least one sub-window of one frame (got {sub_windows} x {frames_per_sub_window})"
                ),
            )
            .into());
        }
        Ok(Self {
            m_bands,
            sub_windows,
            frames_per_sub_window,
            ring: vec![0.0; (sub_windows - 1) * m_bands],
            ring_pos: 0,
            current: vec![f64::INFINITY; m_bands],
            count: 0,
            initialized: false,
        })
    }

    /// Sizes the tracker for a window of `window_seconds` at `frames_per_second`
    /// frames per second; the effective window rounds up to a whole number of
    /// sub-windows.
    pub fn from_duration(
        m_bands: usize,
        window_seconds: f64,
        frames_per_second: f64,
        sub_windows: usize,
    ) -> Result<Self> {
        if !(window_seconds.is_finite() && window_seconds > 0.0) {
            return Err(ConfigError::new(
                "tracker_window_seconds",
                format!("must be positive, got {window_seconds}"),
            )
            .into());
        }
        let frames = (window_seconds * frames_per_second - 1e-9).ceil().max(1.0) as usize;
        let per_sub = frames.div_ceil(sub_windows.max(1)).max(1);
        Self::new(m_bands, sub_windows, per_sub)
    }

    pub fn m_bands(&self) -> usize {
        self.m_bands
    }

    pub fn sub_windows(&self) -> usize {
        self.sub_windows
    }

    pub fn frames_per_sub_window(&self) -> usize {
        self.frames_per_sub_window
    }

    pub fn window_frames(&self) -> usize {
        self.sub_windows * self.frames_per_sub_window
    }

    /// Sets every stored minimum to `levels`, as if the past window held them.
    pub fn seed(&mut self, levels: &[f64]) {
        assert_eq!(levels.len(), self.m_bands, "band count");
        for chunk in self.ring.chunks_exact_mut(self.m_bands) {
            chunk.copy_from_slice(levels);
        }
        self.current.copy_from_slice(levels);
        self.count = 0;
        self.ring_pos = 0;
        self.initialized = true;
    }

    /// Consumes one frame of band levels and writes the windowed minimum.
    pub fn track_into(&mut self, bands: &[f64], out: &mut [f64]) {
        assert_eq!(bands.len(), self.m_bands, "band count");
        assert_eq!(out.len(), self.m_bands, "band count");
        if !self.initialized {
            self.seed(bands);
        }
        for (c, &x) in self.current.iter_mut().zip(bands) {
            *c = c.min(x);
        }
        self.count += 1;
        out.copy_from_slice(&self.current);
        for chunk in self.ring.chunks_exact(self.m_bands) {
            for (o, &r) in out.iter_mut().zip(chunk) {
                *o = o.min(r);
            }
        }
        if self.count == self.frames_per_sub_window {
            if !self.ring.is_empty() {
                let start = self.ring_pos * self.m_bands;
                self.ring[start..start + self.m_bands].copy_from_slice(&self.current);
                self.ring_pos = (self.ring_pos + 1) % (self.sub_windows - 1);
            }
            self.current.fill(f64::INFINITY);
            self.count = 0;
        }
    }

    pub fn track_minimum(&mut self, bands: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m_bands];
        self.track_into(bands, &mut out);
        out
    }
}

/// Amplitude factors that lift a tracked minimum to the level the smoothed
/// band rarely exceeds.
///
/// A band of `width` bins, power-smoothed with factor `a`, has a relative
/// spread of about `s = sqrt((1 - a) / ((1 + a) * width))`. Both the gap from
/// the windowed minimum to the mean and from the mean to the upper tail scale
/// with `s`, so the power ratio is modelled as `exp(bias * s)`. `bias = 0`
/// leaves the raw minimum.
pub fn ceiling_bias(
    band_widths: impl IntoIterator<Item = usize>,
    smoothing: f64,
    bias: f64,
) -> Vec<f64> {
    band_widths
        .into_iter()
        .map(|width| {
            let spread = ((1.0 - smoothing) / ((1.0 + smoothing) * width as f64)).sqrt();
            (0.5 * bias * spread).exp()
        })
        .collect()
}

/// Time smoothing of the tracked noise floor.
#[derive(Debug, Clone)]
pub struct NoiseState {
    pub w_raw: Vec<f64>,
    pub w_smooth: Vec<f64>,
    pub alpha: f64,
    initialized: bool,
}

impl NoiseState {
    pub fn new(m_bands: usize, alpha: f64) -> Self {
        Self {
            w_raw: vec![0.0; m_bands],
            w_smooth: vec![0.0; m_bands],
            alpha,
            initialized: false,
        }
    }

    /// `W = W_prev + alpha * (W' - W_prev)`; the first call adopts `W'`.
    pub fn smooth_noise(&mut self, w_raw: &[f64]) -> &[f64] {
        assert_eq!(w_raw.len(), self.w_smooth.len(), "band count");
        self.w_raw.copy_from_slice(w_raw);
        if self.initialized {
            let a = self.alpha;
            for (w, &r) in self.w_smooth.iter_mut().zip(w_raw) {
                *w = (1.0 - a) * *w + a * r;
            }
        } else {
            self.w_smooth.copy_from_slice(w_raw);
            self.initialized = true;
        }
        &self.w_smooth
    }
}

/// Smoother, tracker, bias and noise smoothing for one stream.
#[derive(Debug, Clone)]
pub struct NoiseEstimator {
    smoother: LevelSmoother,
    tracker: MinTracker,
    bias: Vec<f64>,
    minimum: Vec<f64>,
    noise: NoiseState,
}

impl NoiseEstimator {
    pub fn new(tracker: MinTracker, bias: Vec<f64>, band_smoothing: f64, alpha: f64) -> Self {
        let m = tracker.m_bands();
        assert_eq!(bias.len(), m, "band count");
        Self {
            smoother: LevelSmoother::new(m, band_smoothing),
            tracker,
            bias,
            minimum: vec![0.0; m],
            noise: NoiseState::new(m, alpha),
        }
    }

    /// Feeds one frame of raw band RMS; returns the smoothed noise floor `W`.
    pub fn update(&mut self, band_rms: &[f64]) -> &[f64] {
        let level = self.smoother.update(band_rms);
        self.tracker.track_into(level, &mut self.minimum);
        for (m, &b) in self.minimum.iter_mut().zip(&self.bias) {
            *m *= b;
        }
        self.noise.smooth_noise(&self.minimum)
    }

    /// Smoothed band levels of the latest frame.
    pub fn level(&self) -> &[f64] {
        self.smoother.level()
    }

    /// Bias-compensated windowed minimum `W'` of the latest frame.
    pub fn raw_floor(&self) -> &[f64] {
        &self.noise.w_raw
    }

    pub fn floor(&self) -> &[f64] {
        &self.noise.w_smooth
    }

    pub fn set_alpha(&mut self, alpha: f64) {
        self.noise.alpha = alpha;
    }

    pub fn set_band_smoothing(&mut self, factor: f64) {
        self.smoother.set_factor(factor);
    }

    pub fn set_bias(&mut self, bias: Vec<f64>) {
        assert_eq!(bias.len(), self.bias.len(), "band count");
        self.bias = bias;
    }

    /// Swaps in a tracker of a different length, seeded with the current
    /// unbiased minimum so the estimate carries over.
    pub fn replace_tracker(&mut self, mut tracker: MinTracker) {
        if self.noise.initialized {
            let seed: Vec<f64> = self
                .noise
                .w_raw
                .iter()
                .zip(&self.bias)
                .map(|(w, b)| w / b)
                .collect();
            tracker.seed(&seed);
        }
        self.tracker = tracker;
    }

    pub fn tracker(&self) -> &MinTracker {
        &self.tracker
    }
}
