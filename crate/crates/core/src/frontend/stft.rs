//! Framing, forward transform and weighted overlap-add synthesis.
//!
//! A data frame is `2 * hop` samples: the previous hop followed by the current
//! one. When `2 * hop < frame_size` the frame is zero-padded up to the
//! transform size. With the default hop of `frame_size / 2` this is plain
//! 50% overlap.

use std::sync::Arc;

use realfft::num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use super::window::WolaWindows;
use crate::error::{ConfigError, Error, Result};

/// One transform-sized block of time-domain samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub samples: Vec<f64>,
    pub index: u64,
}

/// Non-negative half of a real-input DFT: `frame_size / 2 + 1` bins, DC first
/// and Nyquist last.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub bins: Vec<Complex64>,
    pub sample_rate_hz: f64,
}

impl Spectrum {
    pub fn zeros(frame_size: usize, sample_rate_hz: f64) -> Self {
        Self {
            bins: vec![Complex64::new(0.0, 0.0); frame_size / 2 + 1],
            sample_rate_hz,
        }
    }

    pub fn len(&self) -> usize {
        self.bins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn frame_size(&self) -> usize {
        2 * (self.bins.len() - 1)
    }

    pub fn magnitude(&self, bin: usize) -> f64 {
        self.bins[bin].norm()
    }

    pub fn power(&self, bin: usize) -> f64 {
        self.bins[bin].norm_sqr()
    }

    pub fn phase(&self, bin: usize) -> f64 {
        self.bins[bin].arg()
    }

    pub fn bin_frequency(&self, bin: usize) -> f64 {
        bin as f64 * self.sample_rate_hz / self.frame_size() as f64
    }

    /// Time-domain energy of the frame this spectrum came from, by Parseval:
    /// interior bins stand for themselves and their conjugate mirror.
    pub fn parseval_energy(&self) -> f64 {
        let last = self.bins.len() - 1;
        let total: f64 = self
            .bins
            .iter()
            .enumerate()
            .map(|(i, b)| {
                let w = if i == 0 || i == last { 1.0 } else { 2.0 };
                w * b.norm_sqr()
            })
            .sum();
        total / self.frame_size() as f64
    }
}

/// Concatenates two hops into a frame, zero-padding up to `frame_size`.
pub fn assemble_frame(
    prev_half: &[f64],
    curr_half: &[f64],
    frame_size: usize,
    index: u64,
) -> Result<Frame> {
    let mut samples = vec![0.0; frame_size];
    assemble_frame_into(prev_half, curr_half, &mut samples)?;
    Ok(Frame { samples, index })
}

pub fn assemble_frame_into(prev_half: &[f64], curr_half: &[f64], frame: &mut [f64]) -> Result<()> {
    let hop = prev_half.len();
    if curr_half.len() != hop {
        return Err(Error::Framing {
            expected: hop,
            actual: curr_half.len(),
        });
    }
    if 2 * hop > frame.len() {
        return Err(Error::Framing {
            expected: frame.len() / 2,
            actual: hop,
        });
    }
    frame[..hop].copy_from_slice(prev_half);
    frame[hop..2 * hop].copy_from_slice(curr_half);
    frame[2 * hop..].fill(0.0);
    Ok(())
}

/// Streaming frame builder: remembers the previous hop.
#[derive(Debug, Clone)]
pub struct Framer {
    prev: Vec<f64>,
    next_index: u64,
}

impl Framer {
    pub fn new(hop: usize) -> Self {
        Self {
            prev: vec![0.0; hop],
            next_index: 0,
        }
    }

    pub fn hop(&self) -> usize {
        self.prev.len()
    }

    /// Builds the next frame from `curr` into `frame` and returns its index.
    pub fn push_into(&mut self, curr: &[f64], frame: &mut [f64]) -> Result<u64> {
        assemble_frame_into(&self.prev, curr, frame)?;
        self.prev.copy_from_slice(curr);
        let index = self.next_index;
        self.next_index += 1;
        Ok(index)
    }

    pub fn push(&mut self, curr: &[f64], frame_size: usize) -> Result<Frame> {
        let mut samples = vec![0.0; frame_size];
        let index = self.push_into(curr, &mut samples)?;
        Ok(Frame { samples, index })
    }

    pub fn reset(&mut self) {
        self.prev.fill(0.0);
        self.next_index = 0;
    }
}

fn check_power_of_two(frame_size: usize) -> Result<()> {
    if frame_size < 4 || !frame_size.is_power_of_two() {
        return Err(ConfigError::new(
            "frame_size",
            format!("must be a power of two >= 4, got {frame_size}"),
        )
        .into());
    }
    Ok(())
}

/// Reusable forward real FFT with preallocated buffers.
pub struct ForwardTransform {
    plan: Arc<dyn RealToComplex<f64>>,
    input: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl ForwardTransform {
    pub fn new(frame_size: usize) -> Result<Self> {
        check_power_of_two(frame_size)?;
        let plan = RealFftPlanner::<f64>::new().plan_fft_forward(frame_size);
        let scratch = plan.make_scratch_vec();
        Ok(Self {
            plan,
            input: vec![0.0; frame_size],
            scratch,
        })
    }

    pub fn frame_size(&self) -> usize {
        self.input.len()
    }

    /// Windows `frame` and transforms it into `out`.
    pub fn process(&mut self, frame: &[f64], window: &[f64], out: &mut Spectrum) {
        let n = self.input.len();
        assert_eq!(frame.len(), n, "frame length");
        assert_eq!(window.len(), n, "window length");
        assert_eq!(out.bins.len(), n / 2 + 1, "spectrum length");
        for ((dst, &x), &w) in self.input.iter_mut().zip(frame).zip(window) {
            *dst = x * w;
        }
        self.plan
            .process_with_scratch(&mut self.input, &mut out.bins, &mut self.scratch)
            .expect("buffer sizes fixed at construction");
    }
}

impl std::fmt::Debug for ForwardTransform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ForwardTransform")
            .field("frame_size", &self.input.len())
            .finish()
    }
}

/// One-shot forward transform of a windowed frame.
pub fn forward_transform(frame: &Frame, window: &[f64], sample_rate_hz: f64) -> Result<Spectrum> {
    let n = frame.samples.len();
    if window.len() != n {
        return Err(Error::Framing {
            expected: n,
            actual: window.len(),
        });
    }
    let mut fwd = ForwardTransform::new(n)?;
    let mut out = Spectrum::zeros(n, sample_rate_hz);
    fwd.process(&frame.samples, window, &mut out);
    Ok(out)
}

/// Synthesis side: inverse FFT, synthesis window and overlap-add.
pub struct OlaState {
    plan: Arc<dyn ComplexToReal<f64>>,
    freq: Vec<Complex64>,
    time: Vec<f64>,
    scratch: Vec<Complex64>,
    overlap: Vec<f64>,
    hop: usize,
}

impl OlaState {
    pub fn new(frame_size: usize, hop: usize) -> Result<Self> {
        check_power_of_two(frame_size)?;
        if hop == 0 || 2 * hop > frame_size {
            return Err(ConfigError::new(
                "hop_size",
                format!("must be in [1, {}], got {hop}", frame_size / 2),
            )
            .into());
        }
        let plan = RealFftPlanner::<f64>::new().plan_fft_inverse(frame_size);
        let scratch = plan.make_scratch_vec();
        Ok(Self {
            plan,
            freq: vec![Complex64::new(0.0, 0.0); frame_size / 2 + 1],
            time: vec![0.0; frame_size],
            scratch,
            overlap: vec![0.0; hop],
            hop,
        })
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    /// Samples of delay between a stream's input and its overlap-added output.
    pub fn output_delay(&self) -> usize {
        self.hop
    }

    pub fn reset(&mut self) {
        self.overlap.fill(0.0);
    }

    /// Scales each bin by its real gain (phase untouched), inverse-transforms,
    /// windows and overlap-adds. Writes exactly `hop` finished samples to `out`.
    pub fn synthesize(
        &mut self,
        spectrum: &Spectrum,
        bin_gains: &[f64],
        windows: &WolaWindows,
        out: &mut [f64],
    ) {
        let n = self.time.len();
        let hop = self.hop;
        assert_eq!(spectrum.bins.len(), n / 2 + 1, "spectrum length");
        assert_eq!(bin_gains.len(), n / 2 + 1, "gain length");
        assert_eq!(out.len(), hop, "output length");
        for ((dst, &x), &g) in self.freq.iter_mut().zip(&spectrum.bins).zip(bin_gains) {
            *dst = x * g;
        }
        // real input: DC and Nyquist are real
        self.freq[0].im = 0.0;
        self.freq[n / 2].im = 0.0;
        self.plan
            .process_with_scratch(&mut self.freq, &mut self.time, &mut self.scratch)
            .expect("buffer sizes fixed at construction");

        let scale = windows.norm / n as f64;
        let synth = &windows.synthesis;
        for i in 0..hop {
            out[i] = self.overlap[i] + self.time[i] * synth[i] * scale;
            self.overlap[i] = self.time[i + hop] * synth[i + hop] * scale;
        }
    }
}

impl std::fmt::Debug for OlaState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("OlaState")
            .field("frame_size", &self.time.len())
            .field("hop", &self.hop)
            .finish()
    }
}

/// Convenience wrapper over [`OlaState::synthesize`] returning a fresh buffer.
pub fn inverse_transform_ola(
    spectrum: &Spectrum,
    bin_gains: &[f64],
    windows: &WolaWindows,
    state: &mut OlaState,
) -> Vec<f64> {
    let mut out = vec![0.0; state.hop()];
    state.synthesize(spectrum, bin_gains, windows, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::frontend::window::WindowKind;

    fn direct_dft(x: &[f64]) -> Vec<Complex64> {
        let n = x.len();
        (0..=n / 2)
            .map(|k| {
                x.iter()
                    .enumerate()
                    .fold(Complex64::new(0.0, 0.0), |acc, (t, &v)| {
                        let ang = -2.0 * PI * (k * t % n) as f64 / n as f64;
                        acc + Complex64::from_polar(v, ang)
                    })
            })
            .collect()
    }

    fn lcg(seed: &mut u64) -> f64 {
        *seed = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((*seed >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
    }

    #[test]
    fn assemble_concatenates() {
        let f = assemble_frame(&[0.0, 0.0], &[1.0, 2.0], 4, 7).unwrap();
        assert_eq!(f.samples, vec![0.0, 0.0, 1.0, 2.0]);
        assert_eq!(f.index, 7);
    }

    #[test]
    fn assemble_zero_pads_short_hops() {
        let f = assemble_frame(&[1.0], &[2.0], 8, 0).unwrap();
        assert_eq!(f.samples, vec![1.0, 2.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn assemble_rejects_mismatch() {
        assert_eq!(
            assemble_frame(&[0.0, 0.0], &[1.0], 4, 0),
            Err(Error::Framing {
                expected: 2,
                actual: 1
            })
        );
        assert!(assemble_frame(&[0.0; 3], &[0.0; 3], 4, 0).is_err());
    }

    #[test]
    fn consecutive_frames_share_a_hop() {
        let mut framer = Framer::new(4);
        let a = framer.push(&[1.0, 2.0, 3.0, 4.0], 8).unwrap();
        let b = framer.push(&[5.0, 6.0, 7.0, 8.0], 8).unwrap();
        assert_eq!(&a.samples[4..], &b.samples[..4]);
        assert_eq!((a.index, b.index), (0, 1));
    }

    #[test]
    fn zero_frame_zero_spectrum() {
        let frame = Frame {
            samples: vec![0.0; 16],
            index: 0,
        };
        let s = forward_transform(&frame, &[1.0; 16], 8000.0).unwrap();
        assert!(s.bins.iter().all(|b| b.norm() == 0.0));
    }

    #[test]
    fn impulse_is_flat() {
        let mut samples = vec![0.0; 32];
        samples[0] = 1.0;
        let s = forward_transform(&Frame { samples, index: 0 }, &[1.0; 32], 8000.0).unwrap();
        assert_eq!(s.len(), 17);
        for b in &s.bins {
            assert!((b - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn bin_centered_cosine_is_concentrated() {
        let n = 64;
        let samples: Vec<f64> = (0..n)
            .map(|t| (2.0 * PI * 3.0 * t as f64 / n as f64).cos())
            .collect();
        let s = forward_transform(&Frame { samples, index: 0 }, &vec![1.0; n], 8000.0).unwrap();
        let peak = s.magnitude(3);
        assert!((peak - n as f64 / 2.0).abs() < 1e-9);
        for k in (0..s.len()).filter(|&k| k != 3) {
            let rel_db = 20.0 * (s.magnitude(k) / peak).log10();
            assert!(rel_db < -260.0, "bin {k}: {rel_db} dB");
        }
    }

    #[test]
    fn matches_direct_dft() {
        let mut seed = 11;
        for n in [4, 8, 16, 32, 64] {
            let samples: Vec<f64> = (0..n).map(|_| lcg(&mut seed)).collect();
            let window = super::super::window::make_window(WindowKind::Hann, n).unwrap();
            let windowed: Vec<f64> = samples.iter().zip(&window).map(|(x, w)| x * w).collect();
            let s = forward_transform(&Frame { samples, index: 0 }, &window, 1.0).unwrap();
            let want = direct_dft(&windowed);
            let scale = want.iter().map(|c| c.norm()).fold(0.0, f64::max);
            for (g, w) in s.bins.iter().zip(&want) {
                assert!((g - w).norm() <= 1e-9 * scale, "n={n}");
            }
        }
    }

    #[test]
    fn parseval_holds() {
        let mut seed = 5;
        for n in [8, 64, 512] {
            let samples: Vec<f64> = (0..n).map(|_| lcg(&mut seed)).collect();
            let window = super::super::window::make_window(WindowKind::Hamming, n).unwrap();
            let energy: f64 = samples
                .iter()
                .zip(&window)
                .map(|(x, w)| (x * w).powi(2))
                .sum();
            let s = forward_transform(&Frame { samples, index: 0 }, &window, 1.0).unwrap();
            assert!((s.parseval_energy() - energy).abs() <= 1e-6 * energy);
        }
    }

    fn run_chain(x: &[f64], n: usize, hop: usize, gain: f64, kind: WindowKind) -> Vec<f64> {
        let windows = WolaWindows::new(kind, n, hop).unwrap();
        let mut fwd = ForwardTransform::new(n).unwrap();
        let mut ola = OlaState::new(n, hop).unwrap();
        let mut framer = Framer::new(hop);
        let mut frame = vec![0.0; n];
        let mut spec = Spectrum::zeros(n, 16000.0);
        let gains = vec![gain; n / 2 + 1];
        let mut out = vec![0.0; x.len()];
        for (chunk, dst) in x.chunks_exact(hop).zip(out.chunks_exact_mut(hop)) {
            framer.push_into(chunk, &mut frame).unwrap();
            fwd.process(&frame, &windows.analysis, &mut spec);
            ola.synthesize(&spec, &gains, &windows, dst);
        }
        out
    }

    fn error_db(out: &[f64], x: &[f64], delay: usize, gain: f64) -> f64 {
        let len = x.len() - delay;
        let err: f64 = (0..len)
            .map(|i| (out[i + delay] - gain * x[i]).powi(2))
            .sum();
        let sig: f64 = (0..len).map(|i| (gain * x[i]).powi(2)).sum();
        10.0 * (err / sig).log10()
    }

    #[test]
    fn unity_chain_reconstructs() {
        let mut seed = 3;
        for n in [256, 512, 1024] {
            let x: Vec<f64> = (0..n * 20).map(|_| lcg(&mut seed) * 0.5).collect();
            for kind in [WindowKind::Hann, WindowKind::Hamming] {
                let out = run_chain(&x, n, n / 2, 1.0, kind);
                assert!(error_db(&out, &x, n / 2, 1.0) < -60.0);
            }
        }
    }

    #[test]
    fn zero_padded_hop_reconstructs() {
        let mut seed = 8;
        let x: Vec<f64> = (0..4096).map(|_| lcg(&mut seed)).collect();
        let out = run_chain(&x, 512, 128, 1.0, WindowKind::Hann);
        assert!(error_db(&out, &x, 128, 1.0) < -60.0);
    }

    #[test]
    fn constant_gain_scales() {
        let mut seed = 21;
        let x: Vec<f64> = (0..8192).map(|_| lcg(&mut seed)).collect();
        let out = run_chain(&x, 512, 256, 0.3, WindowKind::Hann);
        assert!(error_db(&out, &x, 256, 0.3) < -60.0);
    }

    #[test]
    fn floor_gain_sets_steady_level() {
        let fs = 16000.0;
        let floor = 0.1259;
        let x: Vec<f64> = (0..32000)
            .map(|i| 0.5 * (2.0 * PI * 440.0 * i as f64 / fs).sin())
            .collect();
        let out = run_chain(&x, 512, 256, floor, WindowKind::Hann);
        let rms = |s: &[f64]| (s.iter().map(|v| v * v).sum::<f64>() / s.len() as f64).sqrt();
        let delta = 20.0 * (rms(&out[8000..]) / rms(&x[8000..])).log10();
        assert!((delta - 20.0 * floor.log10()).abs() < 0.5);
    }
}
