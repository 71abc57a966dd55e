//! File-level tools around `ns-core`: WAV denoising, noisy-corpus mixing,
//! objective metrics and synthetic fixtures.

pub mod denoise;
pub mod error;
pub mod fixtures;
pub mod metrics;
pub mod mix;
pub mod settings;
pub mod wav;

pub use error::{CliError, Result};
pub use wav::{SampleFormat, WavStream};
