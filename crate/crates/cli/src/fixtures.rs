//! Deterministic synthetic test signals.
//!
//! Every generator takes a seed and produces the same samples for the same
//! (seed, rate, duration) on every platform.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{io_err, Result};
use crate::wav::{SampleFormat, WavStream};

pub const DEFAULT_SEED: u64 = 0x5EED_0001;

/// RMS level the noise fixtures are scaled to (-20 dBFS).
pub const NOISE_RMS: f64 = 0.1;

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn rms(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    (x.iter().map(|v| v * v).sum::<f64>() / x.len() as f64).sqrt()
}

fn scale_to_rms(mut x: Vec<f64>, target: f64) -> Vec<f64> {
    let r = rms(&x);
    if r > 0.0 {
        let g = target / r;
        x.iter_mut().for_each(|v| *v *= g);
    }
    x
}

/// One-pole lowpass with unity DC gain, in place.
fn one_pole_lowpass(x: &mut [f64], cutoff_hz: f64, fs: f64) {
    let p = (-2.0 * PI * cutoff_hz / fs).exp();
    let mut y = 0.0;
    for v in x.iter_mut() {
        y = (1.0 - p) * *v + p * y;
        *v = y;
    }
}

/// Two-pole resonator `(1 - r) / (1 - 2r cos(th) z^-1 + r^2 z^-2)`, in place.
fn resonator(x: &mut [f64], freq_hz: f64, bandwidth_hz: f64, fs: f64) {
    let r = (-PI * bandwidth_hz / fs).exp();
    let a1 = 2.0 * r * (2.0 * PI * freq_hz / fs).cos();
    let a2 = -r * r;
    let (mut y1, mut y2) = (0.0, 0.0);
    for v in x.iter_mut() {
        let y = (1.0 - r) * *v + a1 * y1 + a2 * y2;
        y2 = y1;
        y1 = y;
        *v = y;
    }
}

pub fn white(n: usize, seed: u64) -> Vec<f64> {
    scale_to_rms(gaussian(&mut rng_for(seed, 1), n), NOISE_RMS)
}

/// Pink (1/f power) noise: a bank of one-pole lowpasses at half-octave
/// spaced corners, each driven by its own white source with amplitude
/// proportional to `1/sqrt(corner)`. The sum approximates -3 dB/octave from
/// the lowest corner to Nyquist.
pub fn pink(n: usize, fs: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, 2);
    let mut out = vec![0.0; n];
    let mut corner = 20.0;
    while corner < fs / 2.0 {
        let mut band = gaussian(&mut rng, n);
        one_pole_lowpass(&mut band, corner, fs);
        let w = 1.0 / corner.sqrt();
        out.iter_mut().zip(&band).for_each(|(o, b)| *o += w * b);
        corner *= std::f64::consts::SQRT_2;
    }
    scale_to_rms(out, NOISE_RMS)
}

/// Low-frequency rumble resembling air conditioning: twice-lowpassed noise
/// near 150 Hz plus a weak mains-like hum at 60, 120 and 180 Hz.
pub fn rumble(n: usize, fs: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, 3);
    let mut x = gaussian(&mut rng, n);
    one_pole_lowpass(&mut x, 150.0, fs);
    one_pole_lowpass(&mut x, 150.0, fs);
    let x = scale_to_rms(x, 1.0);
    let phases: Vec<f64> = (0..3).map(|_| rng.random::<f64>() * 2.0 * PI).collect();
    let out = x
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let t = i as f64 / fs;
            let hum: f64 = phases
                .iter()
                .enumerate()
                .map(|(h, ph)| {
                    0.15 / (h + 1) as f64 * (2.0 * PI * 60.0 * (h + 1) as f64 * t + ph).sin()
                })
                .sum();
            v + hum
        })
        .collect();
    scale_to_rms(out, NOISE_RMS)
}

/// Nonstationary babble surrogate: speech-shaped noise whose envelope is a
/// sum of slow random sinusoids (2-6 Hz), kept between 0.15 and 1.
pub fn babble(n: usize, fs: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, 4);
    let mut x = gaussian(&mut rng, n);
    one_pole_lowpass(&mut x, 800.0, fs);
    resonator(&mut x, 500.0, 400.0, fs);
    let mods: Vec<(f64, f64)> = (0..4)
        .map(|_| {
            (
                2.0 + 4.0 * rng.random::<f64>(),
                rng.random::<f64>() * 2.0 * PI,
            )
        })
        .collect();
    let out = x
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let t = i as f64 / fs;
            let m: f64 = mods
                .iter()
                .map(|(f, ph)| (2.0 * PI * f * t + ph).sin())
                .sum::<f64>()
                / 4.0;
            v * (0.575 + 0.425 * m.clamp(-1.0, 1.0))
        })
        .collect();
    scale_to_rms(out, NOISE_RMS)
}

/// Exponential sweep from 50 Hz to 0.45 fs at amplitude 0.5.
pub fn chirp(n: usize, fs: f64) -> Vec<f64> {
    let (f0, f1) = (50.0, 0.45 * fs);
    let dur = n.max(1) as f64 / fs;
    let k = (f1 / f0).ln() / dur;
    (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            0.5 * (2.0 * PI * f0 * ((k * t).exp() - 1.0) / k).sin()
        })
        .collect()
}

const VOWELS: [[f64; 3]; 5] = [
    [700.0, 1200.0, 2600.0],
    [300.0, 2300.0, 3000.0],
    [500.0, 900.0, 2400.0],
    [400.0, 1900.0, 2550.0],
    [600.0, 1000.0, 2500.0],
];
const FORMANT_BW: [f64; 3] = [80.0, 100.0, 140.0];

/// Speech-like signal: words of 2-4 voiced syllables (glottal pulse train at
/// 100-180 Hz with 4 Hz vibrato through three formant resonators, shaped by
/// a sine-root envelope) separated by 0.25-0.6 s pauses. Peak is 0.5.
pub fn speech_like(n: usize, fs: f64, seed: u64) -> Vec<f64> {
    let mut rng = rng_for(seed, 5);
    let mut out = vec![0.0; n];
    let mut t = 0;
    while t < n {
        let syllables = rng.random_range(2..=4);
        for _ in 0..syllables {
            let len = (fs * rng.random_range(0.12..0.25)) as usize;
            if t + len > n {
                break;
            }
            let f0: f64 = rng.random_range(100.0..180.0);
            let mut sig = vec![0.0; len];
            let mut phase = 0.0_f64;
            for (i, s) in sig.iter_mut().enumerate() {
                let next = phase + f0 / fs * (1.0 + 0.03 * (2.0 * PI * 4.0 * i as f64 / fs).sin());
                if next.floor() > phase.floor() {
                    *s = 1.0;
                }
                phase = next;
            }
            let vowel = VOWELS[rng.random_range(0..VOWELS.len())];
            for (f, bw) in vowel.iter().zip(FORMANT_BW) {
                resonator(&mut sig, *f, bw, fs);
            }
            for (i, s) in sig.iter().enumerate() {
                let env = (PI * i as f64 / len as f64).sin().sqrt();
                out[t + i] += s * env;
            }
            t += len;
        }
        t += (fs * rng.random_range(0.25..0.6)) as usize;
    }
    let peak = out.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if peak > 0.0 {
        out.iter_mut().for_each(|v| *v *= 0.5 / peak);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FixtureKind {
    White,
    Pink,
    Rumble,
    Babble,
    Chirp,
    Speech,
}

impl FixtureKind {
    pub const ALL: [FixtureKind; 6] = [
        FixtureKind::White,
        FixtureKind::Pink,
        FixtureKind::Rumble,
        FixtureKind::Babble,
        FixtureKind::Chirp,
        FixtureKind::Speech,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FixtureKind::White => "white",
            FixtureKind::Pink => "pink",
            FixtureKind::Rumble => "rumble",
            FixtureKind::Babble => "babble",
            FixtureKind::Chirp => "chirp",
            FixtureKind::Speech => "speech",
        }
    }

    pub fn generate(self, n: usize, fs: f64, seed: u64) -> Vec<f64> {
        match self {
            FixtureKind::White => white(n, seed),
            FixtureKind::Pink => pink(n, fs, seed),
            FixtureKind::Rumble => rumble(n, fs, seed),
            FixtureKind::Babble => babble(n, fs, seed),
            FixtureKind::Chirp => chirp(n, fs),
            FixtureKind::Speech => speech_like(n, fs, seed),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FixtureOptions {
    pub sample_rate_hz: u32,
    pub seconds: f64,
    pub seed: u64,
    pub format: SampleFormat,
}

impl Default for FixtureOptions {
    fn default() -> Self {
        Self {
            sample_rate_hz: 16000,
            seconds: 10.0,
            seed: DEFAULT_SEED,
            format: SampleFormat::Float32,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FixtureInfo {
    pub kind: FixtureKind,
    pub path: PathBuf,
    pub samples: usize,
    pub rms: f64,
}

/// Writes one mono WAV per fixture kind into `dir`, creating it if needed.
pub fn synthesize_fixtures(
    dir: impl AsRef<Path>,
    opts: &FixtureOptions,
) -> Result<Vec<FixtureInfo>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let fs = f64::from(opts.sample_rate_hz);
    let n = (opts.seconds * fs).round() as usize;
    FixtureKind::ALL
        .iter()
        .map(|&kind| {
            let samples = kind.generate(n, fs, opts.seed);
            let path = dir.join(format!("{}.wav", kind.name()));
            let info = FixtureInfo {
                kind,
                path: path.clone(),
                samples: n,
                rms: rms(&samples),
            };
            WavStream::mono(opts.sample_rate_hz, opts.format, samples).write(&path)?;
            Ok(info)
        })
        .collect()
}
