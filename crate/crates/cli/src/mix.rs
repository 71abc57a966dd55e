//! Noise mixing at a target SNR.
//!
//! The SNR is the active-speech level (see [`crate::metrics::active_level`])
//! over the RMS of the noise actually added.

use std::path::Path;

use crate::error::{CliError, Result};
use crate::metrics::active_level;
use crate::wav::WavStream;

/// Peak ceiling of the mixture, -1 dBFS.
pub fn peak_ceiling() -> f64 {
    10f64.powf(-1.0 / 20.0)
}

#[derive(Debug, Clone)]
pub struct Mixture {
    pub mixture: Vec<f64>,
    /// Speech after the same normalization as the mixture.
    pub clean: Vec<f64>,
    /// Noise exactly as added, after normalization.
    pub noise: Vec<f64>,
    /// Gain applied to the (looped) noise before normalization.
    pub noise_gain: f64,
    /// Gain applied to everything to keep the peak at or below -1 dBFS.
    pub normalization: f64,
}

/// Repeats or truncates `noise` to `len` samples.
pub fn loop_to_length(noise: &[f64], len: usize) -> Vec<f64> {
    if noise.is_empty() {
        return vec![0.0; len];
    }
    noise.iter().copied().cycle().take(len).collect()
}

/// Mixes mono signals. `f64::INFINITY` as the target means no noise.
pub fn mix_at_snr(
    speech: &[f64],
    noise: &[f64],
    sample_rate_hz: f64,
    target_snr_db: f64,
) -> Result<Mixture> {
    let speech_level = active_level(speech, sample_rate_hz).ok_or(CliError::SilentSpeech)?;
    let looped = loop_to_length(noise, speech.len());
    let noise_gain = if target_snr_db == f64::INFINITY {
        0.0
    } else {
        let noise_rms = crate::fixtures::rms(&looped);
        if noise_rms == 0.0 {
            return Err(CliError::SilentNoise);
        }
        speech_level / noise_rms * 10f64.powf(-target_snr_db / 20.0)
    };
    let mut noise: Vec<f64> = looped.iter().map(|v| v * noise_gain).collect();
    let mut mixture: Vec<f64> = speech.iter().zip(&noise).map(|(s, n)| s + n).collect();
    let peak = mixture.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let normalization = if peak > peak_ceiling() {
        peak_ceiling() / peak
    } else {
        1.0
    };
    let mut clean = speech.to_vec();
    if normalization != 1.0 {
        for buf in [&mut mixture, &mut clean, &mut noise] {
            buf.iter_mut().for_each(|v| *v *= normalization);
        }
    }
    Ok(Mixture {
        mixture,
        clean,
        noise,
        noise_gain,
        normalization,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct MixSummary {
    pub noise_gain: f64,
    pub normalization: f64,
    pub channels: usize,
    pub samples: usize,
}

/// File front end for [`mix_at_snr`]. Channel `c` of the speech is mixed
/// with channel `c mod k` of a `k`-channel noise file; the output keeps the
/// speech file's rate and sample format. Multichannel speech uses the noise
/// gain and normalization derived from its first channel.
pub fn mix_files(
    speech_path: &Path,
    noise_path: &Path,
    target_snr_db: f64,
    output_path: &Path,
    clean_output: Option<&Path>,
) -> Result<MixSummary> {
    let speech = WavStream::read(speech_path)?;
    let noise = WavStream::read(noise_path)?;
    if speech.sample_rate_hz != noise.sample_rate_hz {
        return Err(CliError::RateMismatch {
            speech: speech.sample_rate_hz,
            noise: noise.sample_rate_hz,
        });
    }
    let fs = f64::from(speech.sample_rate_hz);
    let first = mix_at_snr(&speech.channels[0], &noise.channels[0], fs, target_snr_db)?;
    let (g, norm) = (first.noise_gain, first.normalization);
    let mut mixed = Vec::with_capacity(speech.channel_count());
    let mut cleaned = Vec::with_capacity(speech.channel_count());
    for (c, s) in speech.channels.iter().enumerate() {
        let n = loop_to_length(&noise.channels[c % noise.channel_count()], s.len());
        mixed.push(s.iter().zip(&n).map(|(s, n)| (s + g * n) * norm).collect());
        cleaned.push(s.iter().map(|s| s * norm).collect());
    }
    let out = WavStream {
        channels: mixed,
        ..speech.clone()
    };
    out.write(output_path)?;
    if let Some(path) = clean_output {
        WavStream {
            channels: cleaned,
            ..speech.clone()
        }
        .write(path)?;
    }
    Ok(MixSummary {
        noise_gain: g,
        normalization: norm,
        channels: speech.channel_count(),
        samples: speech.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn looping() {
        assert_eq!(
            loop_to_length(&[1.0, 2.0], 5),
            vec![1.0, 2.0, 1.0, 2.0, 1.0]
        );
        assert_eq!(loop_to_length(&[1.0, 2.0, 3.0], 2), vec![1.0, 2.0]);
    }

    #[test]
    fn silent_speech_rejected() {
        let err = mix_at_snr(&[0.0; 2000], &[0.1; 2000], 16000.0, 6.0).unwrap_err();
        assert!(matches!(err, CliError::SilentSpeech));
        assert!(matches!(
            mix_at_snr(&[0.1; 2000], &[0.0; 2000], 16000.0, 6.0).unwrap_err(),
            CliError::SilentNoise
        ));
    }

    #[test]
    fn loud_mix_is_normalized() {
        let s: Vec<f64> = (0..4800).map(|i| 0.9 * (i as f64 * 0.1).sin()).collect();
        let n: Vec<f64> = (0..4800)
            .map(|i| if i % 2 == 0 { 0.5 } else { -0.5 })
            .collect();
        let m = mix_at_snr(&s, &n, 16000.0, 0.0).unwrap();
        let peak = m.mixture.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        assert!(peak <= peak_ceiling() + 1e-12);
        assert!(m.normalization < 1.0);
        for i in 0..s.len() {
            assert!((m.mixture[i] - m.clean[i] - m.noise[i]).abs() < 1e-12);
        }
    }
}
