//! Whole-file suppression with latency compensation.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use ns_core::{NsConfig, NsProcessor};

use crate::error::{io_err, CliError, Result};
use crate::wav::WavStream;

/// Processes one channel and returns output aligned with the input and of
/// the same length. With `diag`, one CSV row per frame is appended.
pub fn denoise_channel(
    input: &[f64],
    config: NsConfig,
    channel: usize,
    mut diag: Option<&mut String>,
) -> Result<Vec<f64>> {
    let mut p = NsProcessor::create(config)?;
    let lat = p.latency_samples();
    let mut out = Vec::with_capacity(input.len() + lat);
    let mut row = |d: &ns_core::FrameDiagnostics<'_>| {
        if let Some(buf) = diag.as_deref_mut() {
            let _ = write!(buf, "{channel},{}", d.frame_index);
            for v in d.band_gains.iter().chain(d.noise_floor) {
                let _ = write!(buf, ",{v:.6e}");
            }
            buf.push('\n');
        }
    };
    p.process_with(input, &mut out, &mut row);
    p.process_with(&vec![0.0; lat], &mut out, &mut row);
    p.flush_into(&mut out);
    out.drain(..lat);
    Ok(out)
}

pub fn diagnostics_header(bands: usize) -> String {
    let mut h = String::from("channel,frame");
    for k in 0..bands {
        let _ = write!(h, ",gain_{k}");
    }
    for k in 0..bands {
        let _ = write!(h, ",noise_{k}");
    }
    h.push('\n');
    h
}

#[derive(Debug, Clone)]
pub struct DenoiseSummary {
    pub channels: usize,
    pub samples: usize,
    pub sample_rate_hz: u32,
    pub latency_samples: usize,
    pub config: NsConfig,
}

/// Runs every channel through its own processor, each on its own thread.
pub fn denoise_stream(
    input: &WavStream,
    config: NsConfig,
    with_diagnostics: bool,
) -> Result<(WavStream, Option<String>)> {
    if f64::from(input.sample_rate_hz) != config.sample_rate_hz {
        return Err(CliError::Shape(format!(
            "config rate {} Hz, stream rate {} Hz",
            config.sample_rate_hz, input.sample_rate_hz
        )));
    }
    let results: Vec<Result<(Vec<f64>, String)>> = std::thread::scope(|s| {
        let handles: Vec<_> = input
            .channels
            .iter()
            .enumerate()
            .map(|(c, ch)| {
                s.spawn(move || {
                    let mut diag = String::new();
                    let out =
                        denoise_channel(ch, config, c, with_diagnostics.then_some(&mut diag))?;
                    Ok((out, diag))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("channel worker panicked"))
            .collect()
    });
    let mut channels = Vec::with_capacity(results.len());
    let mut diag = with_diagnostics.then(|| diagnostics_header(config.m_bands));
    for r in results {
        let (out, rows) = r?;
        channels.push(out);
        if let Some(d) = diag.as_mut() {
            d.push_str(&rows);
        }
    }
    Ok((
        WavStream {
            channels,
            ..input.clone()
        },
        diag,
    ))
}

/// Reads `input_path`, suppresses noise and writes `output_path` with the
/// same rate, format, channel count and length.
pub fn denoise_file(
    input_path: &Path,
    output_path: &Path,
    config: NsConfig,
    diagnostics_path: Option<&Path>,
) -> Result<DenoiseSummary> {
    let input = WavStream::read(input_path)?;
    let (output, diag) = denoise_stream(&input, config, diagnostics_path.is_some())?;
    output.write(output_path)?;
    if let (Some(path), Some(text)) = (diagnostics_path, diag) {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err(path))?);
        f.write_all(text.as_bytes()).map_err(io_err(path))?;
        f.flush().map_err(io_err(path))?;
    }
    Ok(DenoiseSummary {
        channels: output.channel_count(),
        samples: output.len(),
        sample_rate_hz: output.sample_rate_hz,
        latency_samples: config.hop(),
        config,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ns_core::DcPolicy;

    #[test]
    fn aligned_passthrough() {
        let cfg = NsConfig {
            mu: 0.0,
            hpf_cutoff_hz: 0.0,
            dc_policy: DcPolicy::Pass,
            ..NsConfig::default()
        };
        let x: Vec<f64> = (0..5000).map(|i| 0.3 * (i as f64 * 0.05).sin()).collect();
        let y = denoise_channel(&x, cfg, 0, None).unwrap();
        assert_eq!(y.len(), x.len());
        let err: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
        let sig: f64 = x.iter().map(|a| a * a).sum();
        assert!(10.0 * (err / sig).log10() < -60.0);
    }

    #[test]
    fn diagnostics_rows() {
        let mut d = String::new();
        let cfg = NsConfig::default();
        denoise_channel(&vec![0.01; 2560], cfg, 3, Some(&mut d)).unwrap();
        let rows: Vec<&str> = d.lines().collect();
        assert_eq!(rows.len(), 11);
        assert!(rows[0].starts_with("3,0,"));
        assert_eq!(rows[0].split(',').count(), 2 + 2 * cfg.m_bands);
        assert_eq!(
            diagnostics_header(2),
            "channel,frame,gain_0,gain_1,noise_0,noise_1\n"
        );
    }
}
