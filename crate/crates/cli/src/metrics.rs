//! Objective metrics against a clean reference.
//!
//! Signals are cut into 30 ms non-overlapping segments. A segment is speech
//! active when its clean energy is within 40 dB of the loudest clean
//! segment. A trailing partial segment is ignored.

use ns_core::filterbank::{band_rms_into, build_layout};
use ns_core::frontend::{make_window, ForwardTransform, Spectrum, WindowKind};

use crate::error::{CliError, Result};

pub const SEGMENT_SECONDS: f64 = 0.03;
/// Activity gate relative to the loudest segment, as an energy ratio (-40 dB).
pub const ACTIVITY_GATE: f64 = 1e-4;
pub const SEG_SNR_MIN_DB: f64 = -10.0;
pub const SEG_SNR_MAX_DB: f64 = 35.0;

const TINY: f64 = 1e-20;

pub fn segment_len(sample_rate_hz: f64) -> usize {
    ((SEGMENT_SECONDS * sample_rate_hz).round() as usize).max(1)
}

fn energy(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

/// Per-segment activity from the clean reference.
pub fn segment_activity(clean: &[f64], seg_len: usize) -> Vec<bool> {
    let energies: Vec<f64> = clean.chunks_exact(seg_len).map(energy).collect();
    let peak = energies.iter().copied().fold(0.0, f64::max);
    energies
        .iter()
        .map(|&e| peak > 0.0 && e > peak * ACTIVITY_GATE)
        .collect()
}

/// RMS over speech-active segments, `None` for a silent signal.
pub fn active_level(x: &[f64], sample_rate_hz: f64) -> Option<f64> {
    let seg = segment_len(sample_rate_hz);
    let active = segment_activity(x, seg);
    let (mut e, mut n) = (0.0, 0usize);
    for (chunk, &on) in x.chunks_exact(seg).zip(&active) {
        if on {
            e += energy(chunk);
            n += chunk.len();
        }
    }
    (n > 0).then(|| (e / n as f64).sqrt())
}

/// Energy lost by `processed` relative to `reference` over the segments
/// where `reference` is active, in dB (positive means quieter).
pub fn active_energy_loss_db(
    reference: &[f64],
    processed: &[f64],
    sample_rate_hz: f64,
) -> Option<f64> {
    let seg = segment_len(sample_rate_hz);
    let active = segment_activity(reference, seg);
    let (mut er, mut ep) = (0.0, 0.0);
    for ((r, p), &on) in reference
        .chunks_exact(seg)
        .zip(processed.chunks_exact(seg))
        .zip(&active)
    {
        if on {
            er += energy(r);
            ep += energy(p);
        }
    }
    (er > 0.0).then(|| 10.0 * (er / ep.max(TINY)).log10())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasureOptions {
    /// Samples by which `processed` lags the other two signals.
    pub latency: usize,
    /// Leading span excluded from every statistic (estimator convergence).
    pub skip_seconds: f64,
    /// Transform size for per-band attenuation.
    pub frame_size: usize,
    pub bands: usize,
}

impl MeasureOptions {
    pub fn for_sample_rate(sample_rate_hz: f64) -> Self {
        let cfg = ns_core::NsConfig::for_sample_rate(sample_rate_hz);
        Self {
            latency: 0,
            skip_seconds: 0.0,
            frame_size: cfg.frame_size,
            bands: cfg.m_bands,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsReport {
    /// `None` when the clean reference has no active segment.
    pub global_snr_before_db: Option<f64>,
    pub global_snr_after_db: Option<f64>,
    pub segmental_snr_before_db: Option<f64>,
    pub segmental_snr_after_db: Option<f64>,
    /// Noisy-to-processed energy ratio over inactive segments; `None` when
    /// every segment is active.
    pub noise_attenuation_db: Option<f64>,
    /// Same ratio per band, from frames lying wholly in inactive segments.
    /// Empty when there is no such frame.
    pub band_attenuation_db: Vec<f64>,
    pub active_segments: usize,
    pub evaluated_segments: usize,
}

impl MetricsReport {
    pub fn segmental_snr_gain_db(&self) -> Option<f64> {
        Some(self.segmental_snr_after_db? - self.segmental_snr_before_db?)
    }

    pub fn global_snr_gain_db(&self) -> Option<f64> {
        Some(self.global_snr_after_db? - self.global_snr_before_db?)
    }
}

fn fmt_db(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2} dB"))
}

impl std::fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "segments:          {} evaluated, {} speech-active",
            self.evaluated_segments, self.active_segments
        )?;
        writeln!(
            f,
            "global SNR:        {} -> {}",
            fmt_db(self.global_snr_before_db),
            fmt_db(self.global_snr_after_db)
        )?;
        writeln!(
            f,
            "segmental SNR:     {} -> {}",
            fmt_db(self.segmental_snr_before_db),
            fmt_db(self.segmental_snr_after_db)
        )?;
        writeln!(
            f,
            "noise attenuation: {}",
            fmt_db(self.noise_attenuation_db)
        )?;
        if !self.band_attenuation_db.is_empty() {
            let bands: Vec<String> = self
                .band_attenuation_db
                .iter()
                .map(|v| format!("{v:.1}"))
                .collect();
            writeln!(f, "band attenuation:  [{}] dB", bands.join(", "))?;
        }
        Ok(())
    }
}

fn seg_snr(c: &[f64], p: &[f64]) -> f64 {
    let err: f64 = c.iter().zip(p).map(|(a, b)| (b - a) * (b - a)).sum();
    (10.0 * (energy(c).max(TINY) / err.max(TINY)).log10()).clamp(SEG_SNR_MIN_DB, SEG_SNR_MAX_DB)
}

/// Compares `noisy` and `processed` against `clean`. All three must have the
/// same length; `processed` is shifted left by `opts.latency` and the tail
/// that shift exposes is not evaluated.
pub fn measure(
    clean: &[f64],
    noisy: &[f64],
    processed: &[f64],
    sample_rate_hz: f64,
    opts: &MeasureOptions,
) -> Result<MetricsReport> {
    let lat = opts.latency;
    if clean.len() != noisy.len() || processed.len() != clean.len() || lat > clean.len() {
        return Err(CliError::LengthMismatch {
            clean: clean.len(),
            noisy: noisy.len(),
            processed: processed.len().saturating_sub(lat),
            latency: lat,
        });
    }
    let len = clean.len() - lat;
    let clean = &clean[..len];
    let noisy = &noisy[..len];
    let processed = &processed[lat..];

    let seg = segment_len(sample_rate_hz);
    let active = segment_activity(clean, seg);
    let first_seg = (opts.skip_seconds * sample_rate_hz / seg as f64).ceil() as usize;

    let mut clean_active_e = 0.0;
    let mut clean_active_n = 0usize;
    let (mut resid_before, mut resid_after, mut resid_n) = (0.0, 0.0, 0usize);
    let (mut seg_before, mut seg_after, mut n_active) = (0.0, 0.0, 0usize);
    let (mut noise_in, mut noise_out, mut n_inactive) = (0.0, 0.0, 0usize);
    let mut evaluated = 0;
    for (s, &on) in active.iter().enumerate().skip(first_seg) {
        let r = s * seg..(s + 1) * seg;
        let (c, x, y) = (&clean[r.clone()], &noisy[r.clone()], &processed[r]);
        evaluated += 1;
        resid_before += c.iter().zip(x).map(|(a, b)| (b - a) * (b - a)).sum::<f64>();
        resid_after += c.iter().zip(y).map(|(a, b)| (b - a) * (b - a)).sum::<f64>();
        resid_n += seg;
        if on {
            clean_active_e += energy(c);
            clean_active_n += seg;
            seg_before += seg_snr(c, x);
            seg_after += seg_snr(c, y);
            n_active += 1;
        } else {
            noise_in += energy(x);
            noise_out += energy(y);
            n_inactive += 1;
        }
    }

    let global = |resid: f64| {
        (n_active > 0).then(|| {
            let ps = clean_active_e / clean_active_n as f64;
            let pn = resid / resid_n as f64;
            10.0 * (ps.max(TINY) / pn.max(TINY)).log10()
        })
    };
    let band_attenuation_db = band_attenuation(
        noisy,
        processed,
        &active,
        seg,
        first_seg,
        sample_rate_hz,
        opts,
    )?;

    Ok(MetricsReport {
        global_snr_before_db: global(resid_before),
        global_snr_after_db: global(resid_after),
        segmental_snr_before_db: (n_active > 0).then(|| seg_before / n_active as f64),
        segmental_snr_after_db: (n_active > 0).then(|| seg_after / n_active as f64),
        noise_attenuation_db: (n_inactive > 0)
            .then(|| 10.0 * (noise_in.max(TINY) / noise_out.max(TINY)).log10()),
        band_attenuation_db,
        active_segments: n_active,
        evaluated_segments: evaluated,
    })
}

fn band_attenuation(
    noisy: &[f64],
    processed: &[f64],
    active: &[bool],
    seg: usize,
    first_seg: usize,
    sample_rate_hz: f64,
    opts: &MeasureOptions,
) -> Result<Vec<f64>> {
    let n = opts.frame_size;
    let layout = build_layout(n, opts.bands, sample_rate_hz)?;
    let window = make_window(WindowKind::Hann, n)?;
    let mut fwd = ForwardTransform::new(n)?;
    let mut spec = Spectrum::zeros(n, sample_rate_hz);
    let m = layout.m_bands();
    let mut rms = vec![0.0; m];
    let (mut e_in, mut e_out) = (vec![0.0; m], vec![0.0; m]);
    let mut frames = 0;
    let hop = n / 2;
    let mut start = first_seg * seg;
    while start + n <= active.len() * seg {
        let quiet = (start / seg..=(start + n - 1) / seg).all(|s| !active[s]);
        if quiet {
            for (sig, acc) in [(noisy, &mut e_in), (processed, &mut e_out)] {
                fwd.process(&sig[start..start + n], &window, &mut spec);
                band_rms_into(&spec, &layout, &mut rms);
                acc.iter_mut().zip(&rms).for_each(|(a, r)| *a += r * r);
            }
            frames += 1;
        }
        start += hop;
    }
    if frames == 0 {
        return Ok(Vec::new());
    }
    Ok(e_in
        .iter()
        .zip(&e_out)
        .map(|(i, o)| 10.0 * (i.max(TINY) / o.max(TINY)).log10())
        .collect())
}
