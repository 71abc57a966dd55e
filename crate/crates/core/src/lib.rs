//! Streaming, reconfigurable single-channel noise suppression.
//!
//! The engine splits the spectrum into critical bands, tracks each band's
//! noise floor as a windowed minimum (no voice activity detector), derives a
//! floor-clamped subband gain, smooths it over time, and resynthesizes by
//! weighted overlap-add. Classical spectral subtraction rules are available
//! as alternative engines for comparison.
//!
//! ```
//! use ns_core::{NsConfig, NsProcessor};
//!
//! let mut ns = NsProcessor::create(NsConfig::for_sample_rate(16000.0)).unwrap();
//! let input = vec![0.0; 1000];
//! let mut output = ns.process(&input);
//! output.extend(ns.flush());
//! assert_eq!(output.len(), input.len());
//! ```

pub mod config;
pub mod error;
pub mod filterbank;
pub mod frontend;
pub mod noise;
pub mod processor;
pub mod suppression;

pub use config::{Engine, NsConfig};
pub use error::{ConfigError, Error, Result};
pub use filterbank::{BandLayout, BandSpectrum, DcPolicy};
pub use frontend::WindowKind;
pub use processor::{FrameDiagnostics, NsProcessor};
pub use suppression::{ClassicPss, ClassicPssKind, SuppressionConfig, SuppressionPreset};
