//! Gain rules.
//!
//! The subband rule is `G' = sqrt(1 - mu * W^2 / Z^2)` clamped to
//! `[max_suppression, 1]`, followed by per-band smoothing
//! `G(m) = G(m-1) + beta * (G'(m) - G(m-1))` where `beta` grows with `G'`.
//! The classical parametric spectral subtraction rules
//! `G = [1 - (Y / |X|^2)^a]^b` are kept alongside as baselines.

use std::fmt;
use std::str::FromStr;

use crate::error::ConfigError;

pub const MU_MAX: f64 = 1.3;

/// Converts a maximum attenuation in dB to the linear gain floor.
pub fn db_to_gain_floor(attenuation_db: f64) -> f64 {
    10f64.powf(-attenuation_db / 20.0)
}

/// Named `max_suppression` settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SuppressionPreset {
    /// 6 dB, for voice-trigger and ASR front ends.
    VoiceTrigger,
    /// 12 dB.
    Moderate,
    /// 18 dB, for VoIP.
    Voip,
}

impl SuppressionPreset {
    pub fn max_suppression(self) -> f64 {
        match self {
            SuppressionPreset::VoiceTrigger => 0.5,
            SuppressionPreset::Moderate => 0.2512,
            SuppressionPreset::Voip => 0.1259,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuppressionConfig {
    pub mu: f64,
    pub max_suppression: f64,
    pub beta_min: f64,
    pub beta_max: f64,
}

impl Default for SuppressionConfig {
    fn default() -> Self {
        Self {
            mu: 1.0,
            max_suppression: SuppressionPreset::Moderate.max_suppression(),
            beta_min: 0.2,
            beta_max: 0.9,
        }
    }
}

impl SuppressionConfig {
    pub fn validate(&self, errors: &mut Vec<ConfigError>) {
        if !(0.0..=MU_MAX).contains(&self.mu) {
            errors.push(ConfigError::new(
                "mu",
                format!("must be in [0, {MU_MAX}], got {}", self.mu),
            ));
        }
        if !(self.max_suppression > 0.0 && self.max_suppression <= 1.0) {
            errors.push(ConfigError::new(
                "max_suppression",
                format!("must be in (0, 1], got {}", self.max_suppression),
            ));
        }
        for (field, v) in [("beta_min", self.beta_min), ("beta_max", self.beta_max)] {
            if !(0.0..=1.0).contains(&v) {
                errors.push(ConfigError::new(
                    field,
                    format!("must be in [0, 1], got {v}"),
                ));
            }
        }
        if self.beta_min > self.beta_max {
            errors.push(ConfigError::new(
                "beta_min",
                format!(
                    "must not exceed beta_max ({} > {})",
                    self.beta_min, self.beta_max
                ),
            ));
        }
    }
}

/// Subband gain for band level `z` and noise floor `w`.
///
/// A negative radicand is floored at zero and a silent band (`z = 0`) is held
/// at the floor, so the result is always in `[max_suppression, 1]`.
#[inline]
pub fn raw_gain(z: f64, w: f64, cfg: &SuppressionConfig) -> f64 {
    if z <= 0.0 {
        return cfg.max_suppression;
    }
    let ratio = w / z;
    let radicand = (1.0 - cfg.mu * ratio * ratio).max(0.0);
    radicand.sqrt().clamp(cfg.max_suppression, 1.0)
}

/// Smoothing factor for a raw gain: affine from `beta_min` at the floor to
/// `beta_max` at unity.
#[inline]
pub fn beta_of(g_raw: f64, cfg: &SuppressionConfig) -> f64 {
    let span = 1.0 - cfg.max_suppression;
    if span <= 0.0 {
        return cfg.beta_max;
    }
    let t = ((g_raw - cfg.max_suppression) / span).clamp(0.0, 1.0);
    cfg.beta_min + (cfg.beta_max - cfg.beta_min) * t
}

/// Smoothed band gains for one stream. Starts at unity.
#[derive(Debug, Clone)]
pub struct GainState {
    pub g_prev: Vec<f64>,
    pub g_raw: Vec<f64>,
}

impl GainState {
    pub fn new(m_bands: usize) -> Self {
        Self {
            g_prev: vec![1.0; m_bands],
            g_raw: vec![1.0; m_bands],
        }
    }

    /// Applies one frame of smoothing and stores the result as `G(m-1)` for
    /// the next frame.
    pub fn smooth_gain(&mut self, g_raw: &[f64], cfg: &SuppressionConfig) -> &[f64] {
        assert_eq!(g_raw.len(), self.g_prev.len(), "band count");
        self.g_raw.copy_from_slice(g_raw);
        for (g, &r) in self.g_prev.iter_mut().zip(g_raw) {
            let beta = beta_of(r, cfg);
            *g = (1.0 - beta) * *g + beta * r;
        }
        &self.g_prev
    }

    /// Computes raw gains from levels and floors, then smooths them.
    pub fn update(&mut self, z: &[f64], w: &[f64], cfg: &SuppressionConfig) -> &[f64] {
        assert_eq!(z.len(), self.g_prev.len(), "band count");
        for ((g, &z), (&w, r)) in self
            .g_prev
            .iter_mut()
            .zip(z)
            .zip(w.iter().zip(self.g_raw.iter_mut()))
        {
            *r = raw_gain(z, w, cfg);
            let beta = beta_of(*r, cfg);
            *g = (1.0 - beta) * *g + beta * *r;
        }
        &self.g_prev
    }

    /// Pulls stored gains into `[max_suppression, 1]` after a floor change.
    pub fn clamp_to(&mut self, cfg: &SuppressionConfig) {
        for g in self.g_prev.iter_mut().chain(self.g_raw.iter_mut()) {
            *g = g.clamp(cfg.max_suppression, 1.0);
        }
    }
}

/// The three parametric spectral subtraction variants and their
/// `(a, b)` exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClassicPssKind {
    PowerSubtraction,
    MagnitudeSubtraction,
    ShortTimeWiener,
}

impl ClassicPssKind {
    pub const ALL: [ClassicPssKind; 3] = [
        ClassicPssKind::PowerSubtraction,
        ClassicPssKind::MagnitudeSubtraction,
        ClassicPssKind::ShortTimeWiener,
    ];

    pub fn exponents(self) -> (f64, f64) {
        match self {
            ClassicPssKind::PowerSubtraction => (2.0, 0.5),
            ClassicPssKind::MagnitudeSubtraction => (1.0, 1.0),
            ClassicPssKind::ShortTimeWiener => (2.0, 1.0),
        }
    }
}

impl fmt::Display for ClassicPssKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassicPssKind::PowerSubtraction => "power",
            ClassicPssKind::MagnitudeSubtraction => "magnitude",
            ClassicPssKind::ShortTimeWiener => "wiener",
        })
    }
}

impl FromStr for ClassicPssKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "power" => Ok(ClassicPssKind::PowerSubtraction),
            "magnitude" => Ok(ClassicPssKind::MagnitudeSubtraction),
            "wiener" => Ok(ClassicPssKind::ShortTimeWiener),
            other => Err(ConfigError::new(
                "engine",
                format!("unknown rule '{other}'"),
            )),
        }
    }
}

/// A classical rule together with its gain floor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicPss {
    pub kind: ClassicPssKind,
    pub floor_gain: f64,
}

impl ClassicPss {
    pub fn validate(&self, errors: &mut Vec<ConfigError>) {
        if !(self.floor_gain > 0.0 && self.floor_gain <= 1.0) {
            errors.push(ConfigError::new(
                "floor_gain",
                format!("must be in (0, 1], got {}", self.floor_gain),
            ));
        }
    }
}

/// `[1 - (y_power / x_power)^a]^b`, with the base floored at zero and the
/// result clamped to `[floor_gain, 1]`. Zero input power yields the floor.
///
/// The ratio is power over power, raised to `a`. The textbook magnitude-domain
/// form raises `sqrt(Y) / |X|` instead; this rule keeps the power ratio.
#[inline]
pub fn classic_gain(pss: &ClassicPss, x_power: f64, y_power: f64) -> f64 {
    if x_power <= 0.0 {
        return pss.floor_gain;
    }
    let (a, b) = pss.kind.exponents();
    let base = (1.0 - (y_power / x_power).powf(a)).max(0.0);
    base.powf(b).clamp(pss.floor_gain, 1.0)
}
