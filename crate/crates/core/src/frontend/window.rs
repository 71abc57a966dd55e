//! Analysis/synthesis windows.
//!
//! All windows are generated in periodic (DFT-even) form,
//! `w[i] = a0 - (1 - a0) cos(2 pi i / n)`, which overlap-adds to the constant
//! `2 a0` at a hop of `n / 2`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{ConfigError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum WindowKind {
    #[default]
    Hann,
    Hamming,
    /// Raised cosine on a pedestal. `rolloff` is the depth of the cosine
    /// taper: 1.0 is Hann, 0.0 is rectangular, 0.92 is Hamming.
    RaisedCosine {
        rolloff: f64,
    },
}

impl WindowKind {
    /// The constant term `a0` of the generalized cosine form.
    fn a0(self) -> f64 {
        match self {
            WindowKind::Hann => 0.5,
            WindowKind::Hamming => 0.54,
            WindowKind::RaisedCosine { rolloff } => 1.0 - rolloff / 2.0,
        }
    }

    pub fn validate(self) -> std::result::Result<(), ConfigError> {
        if let WindowKind::RaisedCosine { rolloff } = self {
            if !(0.0..=1.0).contains(&rolloff) {
                return Err(ConfigError::new(
                    "window",
                    format!("raised-cosine rolloff must be in [0, 1], got {rolloff}"),
                ));
            }
        }
        Ok(())
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WindowKind::Hann => f.write_str("hann"),
            WindowKind::Hamming => f.write_str("hamming"),
            WindowKind::RaisedCosine { rolloff } => write!(f, "raised-cosine:{rolloff}"),
        }
    }
}

impl FromStr for WindowKind {
    type Err = ConfigError;

    /// Accepts `hann`, `hanning`, `hamming`, `raised-cosine` and `raised-cosine:<rolloff>`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        let kind = match lower.as_str() {
            "hann" | "hanning" => WindowKind::Hann,
            "hamming" => WindowKind::Hamming,
            "raised-cosine" | "raisedcosine" => WindowKind::RaisedCosine { rolloff: 1.0 },
            other => {
                let rolloff = other
                    .strip_prefix("raised-cosine:")
                    .and_then(|r| r.parse::<f64>().ok())
                    .ok_or_else(|| ConfigError::new("window", format!("unknown window '{s}'")))?;
                WindowKind::RaisedCosine { rolloff }
            }
        };
        kind.validate()?;
        Ok(kind)
    }
}

/// Generates a periodic window of length `n`.
pub fn make_window(kind: WindowKind, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(ConfigError::new("window_length", format!("must be >= 2, got {n}")).into());
    }
    kind.validate()?;
    let a0 = kind.a0();
    Ok((0..n)
        .map(|i| {
            let v = a0 - (1.0 - a0) * (2.0 * PI * i as f64 / n as f64).cos();
            v.clamp(0.0, 1.0)
        })
        .collect())
}

/// Weighted overlap-add window pair: the square root of the configured window
/// applied at both analysis and synthesis, zero-extended to the transform size
/// when the data frame (`2 * hop`) is shorter than it.
#[derive(Debug, Clone)]
pub struct WolaWindows {
    pub analysis: Vec<f64>,
    pub synthesis: Vec<f64>,
    /// Reciprocal of the overlap-added `analysis * synthesis` product.
    pub norm: f64,
    kind: WindowKind,
}

impl WolaWindows {
    pub fn new(kind: WindowKind, frame_size: usize, hop: usize) -> Result<Self> {
        if hop == 0 || 2 * hop > frame_size {
            return Err(ConfigError::new(
                "hop_size",
                format!("must be in [1, {}], got {hop}", frame_size / 2),
            )
            .into());
        }
        let data_len = 2 * hop;
        let base = make_window(kind, data_len)?;
        let mut analysis: Vec<f64> = base.iter().map(|w| w.sqrt()).collect();
        analysis.resize(frame_size, 0.0);
        let synthesis = analysis.clone();
        let overlap_sum: f64 = (0..hop).map(|i| base[i] + base[i + hop]).sum::<f64>() / hop as f64;
        Ok(Self {
            analysis,
            synthesis,
            norm: 1.0 / overlap_sum,
            kind,
        })
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn hann_four() {
        assert_close(
            &make_window(WindowKind::Hann, 4).unwrap(),
            &[0.0, 0.5, 1.0, 0.5],
            1e-15,
        );
    }

    #[test]
    fn hamming_four() {
        assert_close(
            &make_window(WindowKind::Hamming, 4).unwrap(),
            &[0.08, 0.54, 1.0, 0.54],
            1e-15,
        );
    }

    #[test]
    fn raised_cosine_endpoints() {
        let hann = make_window(WindowKind::Hann, 16).unwrap();
        let rc1 = make_window(WindowKind::RaisedCosine { rolloff: 1.0 }, 16).unwrap();
        assert_close(&hann, &rc1, 1e-15);
        let rect = make_window(WindowKind::RaisedCosine { rolloff: 0.0 }, 16).unwrap();
        assert!(rect.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn bounded_and_symmetric() {
        for kind in [
            WindowKind::Hann,
            WindowKind::Hamming,
            WindowKind::RaisedCosine { rolloff: 0.3 },
        ] {
            for n in [2, 3, 8, 31, 512] {
                let w = make_window(kind, n).unwrap();
                assert!(w.iter().all(|v| (0.0..=1.0).contains(v)));
                // periodic form is symmetric about n/2
                for i in 1..n {
                    assert!((w[i] - w[n - i]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rejects_short_and_bad_rolloff() {
        assert!(make_window(WindowKind::Hann, 1).is_err());
        assert!(make_window(WindowKind::RaisedCosine { rolloff: 1.5 }, 8).is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!("Hann".parse::<WindowKind>().unwrap(), WindowKind::Hann);
        assert_eq!(
            "hamming".parse::<WindowKind>().unwrap(),
            WindowKind::Hamming
        );
        assert_eq!(
            "raised-cosine:0.5".parse::<WindowKind>().unwrap(),
            WindowKind::RaisedCosine { rolloff: 0.5 }
        );
        assert!("kaiser".parse::<WindowKind>().is_err());
        assert!("raised-cosine:2".parse::<WindowKind>().is_err());
    }

    #[test]
    fn wola_product_is_cola() {
        for kind in [
            WindowKind::Hann,
            WindowKind::Hamming,
            WindowKind::RaisedCosine { rolloff: 0.4 },
        ] {
            for (n, hop) in [(512, 256), (512, 128), (64, 32)] {
                let w = WolaWindows::new(kind, n, hop).unwrap();
                for i in 0..hop {
                    let s =
                        w.analysis[i] * w.synthesis[i] + w.analysis[i + hop] * w.synthesis[i + hop];
                    assert!((s * w.norm - 1.0).abs() < 1e-12);
                }
                assert!(w.analysis[2 * hop..].iter().all(|&v| v == 0.0));
            }
        }
    }
}
