//! Full parameter set of the suppressor.

use std::fmt;
use std::str::FromStr;

use crate::error::{ConfigError, Error, Result};
use crate::filterbank::DcPolicy;
use crate::frontend::WindowKind;
use crate::noise::DEFAULT_SUB_WINDOWS;
use crate::suppression::{ClassicPss, ClassicPssKind, SuppressionConfig, SuppressionPreset};

/// Which gain rule drives the output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Engine {
    /// Subband gain with floor clamp and adaptive smoothing.
    Proposed,
    /// Per-bin classical spectral subtraction fed by the same noise tracker.
    Classic(ClassicPss),
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Engine::Proposed => f.write_str("proposed"),
            Engine::Classic(pss) => write!(f, "{}", pss.kind),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NsConfig {
    pub sample_rate_hz: f64,
    /// Transform size `N`, a power of two.
    pub frame_size: usize,
    /// Samples per frame advance; `None` means `frame_size / 2`.
    pub hop_size: Option<usize>,
    pub m_bands: usize,
    pub window: WindowKind,
    /// High-pass prefilter cutoff; 0 disables the filter.
    pub hpf_cutoff_hz: f64,
    /// Noise floor smoothing factor.
    pub alpha: f64,
    pub mu: f64,
    pub max_suppression: f64,
    pub beta_min: f64,
    pub beta_max: f64,
    pub tracker_window_seconds: f64,
    /// Recursive smoothing factor applied to band power before minimum
    /// tracking and gain computation. 0 uses raw frame levels.
    pub band_smoothing: f64,
    /// Bias compensation applied to the tracked minimum, in units of the
    /// smoothed level's relative spread. 0 uses the raw minimum.
    pub tracker_bias: f64,
    pub dc_policy: DcPolicy,
    pub engine: Engine,
}

impl Default for NsConfig {
    fn default() -> Self {
        Self::for_sample_rate(16000.0)
    }
}

impl NsConfig {
    pub const DEFAULT_BANDS: usize = 36;

    /// Defaults for a stream rate: the largest power-of-two frame not longer
    /// than 32 ms (512 at 16 kHz, 256 at 8 kHz, 1024 at 48 kHz).
    pub fn for_sample_rate(sample_rate_hz: f64) -> Self {
        let target = (0.032 * sample_rate_hz).max(4.0) as usize;
        let frame_size = if target.is_power_of_two() {
            target
        } else {
            target.next_power_of_two() / 2
        }
        .max(4);
        Self {
            sample_rate_hz,
            frame_size,
            hop_size: None,
            m_bands: Self::DEFAULT_BANDS.min(frame_size / 2 - 1),
            window: WindowKind::Hann,
            hpf_cutoff_hz: 80.0,
            alpha: 0.1,
            mu: 1.0,
            max_suppression: SuppressionPreset::Moderate.max_suppression(),
            beta_min: 0.2,
            beta_max: 0.9,
            tracker_window_seconds: 2.0,
            band_smoothing: 0.7,
            tracker_bias: 7.0,
            dc_policy: DcPolicy::Zero,
            engine: Engine::Proposed,
        }
    }

    pub fn with_preset(mut self, preset: SuppressionPreset) -> Self {
        self.max_suppression = preset.max_suppression();
        self
    }

    pub fn hop(&self) -> usize {
        self.hop_size.unwrap_or(self.frame_size / 2)
    }

    pub fn suppression(&self) -> SuppressionConfig {
        SuppressionConfig {
            mu: self.mu,
            max_suppression: self.max_suppression,
            beta_min: self.beta_min,
            beta_max: self.beta_max,
        }
    }

    pub fn frames_per_second(&self) -> f64 {
        self.sample_rate_hz / self.hop() as f64
    }

    pub fn sub_windows(&self) -> usize {
        DEFAULT_SUB_WINDOWS
    }

    /// Checks every constraint and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut errors = Vec::new();
        let fs = self.sample_rate_hz;
        let fs_ok = fs.is_finite() && fs > 0.0;
        if !fs_ok {
            errors.push(ConfigError::new(
                "sample_rate_hz",
                format!("must be positive, got {fs}"),
            ));
        }
        let n = self.frame_size;
        let n_ok = n >= 4 && n.is_power_of_two();
        if !n_ok {
            errors.push(ConfigError::new(
                "frame_size",
                format!("must be a power of two >= 4, got {n}"),
            ));
        }
        if let Some(hop) = self.hop_size {
            if hop == 0 || (n_ok && 2 * hop > n) {
                errors.push(ConfigError::new(
                    "hop_size",
                    format!("must be in [1, frame_size / 2], got {hop} for frame_size {n}"),
                ));
            }
        }
        if n_ok && (self.m_bands == 0 || self.m_bands > n / 2 - 1) {
            errors.push(ConfigError::new(
                "m_bands",
                format!(
                    "{} bands do not fit frame_size {} (allowed 1..={})",
                    self.m_bands,
                    n,
                    n / 2 - 1
                ),
            ));
        } else if self.m_bands == 0 {
            errors.push(ConfigError::new("m_bands", "must be at least 1"));
        }
        if let Err(e) = self.window.validate() {
            errors.push(e);
        }
        let fc = self.hpf_cutoff_hz;
        if !(fc == 0.0 || (fc.is_finite() && fc > 0.0 && (!fs_ok || fc < fs / 2.0))) {
            errors.push(ConfigError::new(
                "hpf_cutoff_hz",
                format!("must be 0 (off) or in (0, {}) Hz, got {fc}", fs / 2.0),
            ));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            errors.push(ConfigError::new(
                "alpha",
                format!("must be in [0, 1], got {}", self.alpha),
            ));
        }
        self.suppression().validate(&mut errors);
        if !(self.tracker_window_seconds.is_finite() && self.tracker_window_seconds > 0.0) {
            errors.push(ConfigError::new(
                "tracker_window_seconds",
                format!("must be positive, got {}", self.tracker_window_seconds),
            ));
        }
        if !(0.0..1.0).contains(&self.band_smoothing) {
            errors.push(ConfigError::new(
                "band_smoothing",
                format!("must be in [0, 1), got {}", self.band_smoothing),
            ));
        }
        if !(self.tracker_bias.is_finite() && self.tracker_bias >= 0.0) {
            errors.push(ConfigError::new(
                "tracker_bias",
                format!("must be finite and >= 0, got {}", self.tracker_bias),
            ));
        }
        if let Engine::Classic(pss) = &self.engine {
            pss.validate(&mut errors);
        }
        if errors.is_empty() {
            Ok(())
        } else {
            Err(Error::Invalid(errors))
        }
    }

    /// Applies one `key = value` setting. Keys match the CLI flag names.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), ConfigError> {
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let value = value.trim();
        let num = |field: &'static str| {
            value
                .parse::<f64>()
                .map_err(|_| ConfigError::new(field, format!("expected a number, got '{value}'")))
        };
        let int = |field: &'static str| {
            value
                .parse::<usize>()
                .map_err(|_| ConfigError::new(field, format!("expected an integer, got '{value}'")))
        };
        match key.as_str() {
            "sample-rate" => self.sample_rate_hz = num("sample_rate_hz")?,
            "frame-size" => self.frame_size = int("frame_size")?,
            "hop-size" => self.hop_size = Some(int("hop_size")?),
            "bands" => self.m_bands = int("m_bands")?,
            "window" => self.window = value.parse()?,
            "hpf" => self.hpf_cutoff_hz = num("hpf_cutoff_hz")?,
            "alpha" => self.alpha = num("alpha")?,
            "mu" => self.mu = num("mu")?,
            "max-suppression" => self.max_suppression = num("max_suppression")?,
            "max-suppression-db" => {
                self.max_suppression = crate::suppression::db_to_gain_floor(num("max_suppression")?)
            }
            "beta-min" => self.beta_min = num("beta_min")?,
            "beta-max" => self.beta_max = num("beta_max")?,
            "tracker-window" => self.tracker_window_seconds = num("tracker_window_seconds")?,
            "band-smoothing" => self.band_smoothing = num("band_smoothing")?,
            "tracker-bias" => self.tracker_bias = num("tracker_bias")?,
            "dc" | "dc-policy" => self.dc_policy = value.parse()?,
            "engine" => self.engine = parse_engine(value, self.max_suppression)?,
            other => return Err(ConfigError::new("config", format!("unknown key '{other}'"))),
        }
        Ok(())
    }
}

/// `proposed`, `power`, `magnitude` or `wiener`; classic rules take
/// `floor_gain` as their clamp.
pub fn parse_engine(value: &str, floor_gain: f64) -> std::result::Result<Engine, ConfigError> {
    if value.trim().eq_ignore_ascii_case("proposed") {
        return Ok(Engine::Proposed);
    }
    let kind = ClassicPssKind::from_str(value)?;
    Ok(Engine::Classic(ClassicPss { kind, floor_gain }))
}
