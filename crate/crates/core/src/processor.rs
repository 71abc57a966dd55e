//! Block-streaming suppressor.
//!
//! Per hop of input: prefilter, frame, window and transform, band RMS, noise
//! floor update, band gains, expansion to bins, resynthesis. The current
//! frame's levels update the noise estimate before the same frame is
//! suppressed.

use crate::config::{Engine, NsConfig};
use crate::error::{Error, Result};
use crate::filterbank::{band_rms_into, build_layout, expand_gains_into, BandLayout, DcPolicy};
use crate::frontend::{
    design_hpf, ForwardTransform, Framer, HpfState, OlaState, Spectrum, WolaWindows,
};
use crate::noise::{ceiling_bias, MinTracker, NoiseEstimator};
use crate::suppression::{classic_gain, GainState};

/// Per-frame internals, borrowed from the processor.
#[derive(Debug, Clone, Copy)]
pub struct FrameDiagnostics<'a> {
    pub frame_index: u64,
    pub engine: Engine,
    /// Unsmoothed band RMS of the frame.
    pub band_rms: &'a [f64],
    /// Smoothed band level used by the gain rule.
    pub band_level: &'a [f64],
    /// Smoothed noise floor `W`.
    pub noise_floor: &'a [f64],
    /// Band gains before smoothing (`G'`); for classic engines, the mean
    /// applied bin gain per band.
    pub raw_gains: &'a [f64],
    /// Band gains applied (`G`); for classic engines, the mean applied bin
    /// gain per band.
    pub band_gains: &'a [f64],
    pub bin_gains: &'a [f64],
}

/// A second signal pushed through the exact gains computed for the main
/// input, e.g. the clean reference of a synthetic mixture.
struct ShadowPath {
    hpf: Option<HpfState>,
    framer: Framer,
    fwd: ForwardTransform,
    ola: OlaState,
    pending: Vec<f64>,
    frame: Vec<f64>,
    spectrum: Spectrum,
    out_block: Vec<f64>,
}

pub struct NsProcessor {
    config: NsConfig,
    hop: usize,
    hpf: Option<HpfState>,
    windows: WolaWindows,
    layout: BandLayout,
    framer: Framer,
    fwd: ForwardTransform,
    ola: OlaState,
    estimator: NoiseEstimator,
    gains: GainState,
    pending: Vec<f64>,
    pending_len: usize,
    frame: Vec<f64>,
    spectrum: Spectrum,
    band_rms: Vec<f64>,
    bin_gains: Vec<f64>,
    bin_noise: Vec<f64>,
    classic_band_gains: Vec<f64>,
    out_block: Vec<f64>,
    frames: u64,
    shadow: Option<ShadowPath>,
}

fn clip(x: f64) -> f64 {
    if x.is_nan() {
        0.0
    } else {
        x.clamp(-1.0, 1.0)
    }
}

fn make_hpf(config: &NsConfig) -> Result<Option<HpfState>> {
    if config.hpf_cutoff_hz > 0.0 {
        Ok(Some(design_hpf(
            config.hpf_cutoff_hz,
            config.sample_rate_hz,
        )?))
    } else {
        Ok(None)
    }
}

fn make_estimator(config: &NsConfig, layout: &BandLayout) -> Result<NoiseEstimator> {
    let tracker = MinTracker::from_duration(
        config.m_bands,
        config.tracker_window_seconds,
        config.frames_per_second(),
        config.sub_windows(),
    )?;
    let bias = make_bias(config, layout);
    Ok(NoiseEstimator::new(
        tracker,
        bias,
        config.band_smoothing,
        config.alpha,
    ))
}

fn make_bias(config: &NsConfig, layout: &BandLayout) -> Vec<f64> {
    ceiling_bias(
        (0..layout.m_bands()).map(|k| layout.width(k)),
        config.band_smoothing,
        config.tracker_bias,
    )
}

impl NsProcessor {
    pub fn create(config: NsConfig) -> Result<Self> {
        config.validate()?;
        let n = config.frame_size;
        let hop = config.hop();
        let layout = build_layout(n, config.m_bands, config.sample_rate_hz)?;
        let m = layout.m_bands();
        Ok(Self {
            hop,
            hpf: make_hpf(&config)?,
            windows: WolaWindows::new(config.window, n, hop)?,
            estimator: make_estimator(&config, &layout)?,
            layout,
            framer: Framer::new(hop),
            fwd: ForwardTransform::new(n)?,
            ola: OlaState::new(n, hop)?,
            gains: GainState::new(m),
            pending: vec![0.0; hop],
            pending_len: 0,
            frame: vec![0.0; n],
            spectrum: Spectrum::zeros(n, config.sample_rate_hz),
            band_rms: vec![0.0; m],
            bin_gains: vec![1.0; n / 2 + 1],
            bin_noise: vec![0.0; n / 2 + 1],
            classic_band_gains: vec![1.0; m],
            out_block: vec![0.0; hop],
            frames: 0,
            shadow: None,
            config,
        })
    }

    pub fn config(&self) -> &NsConfig {
        &self.config
    }

    pub fn layout(&self) -> &BandLayout {
        &self.layout
    }

    /// Delay in samples between an input sample and its processed output.
    pub fn latency_samples(&self) -> usize {
        self.ola.output_delay()
    }

    pub fn frames_processed(&self) -> u64 {
        self.frames
    }

    /// Processes `input` and returns every output sample completed so far.
    pub fn process(&mut self, input: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(input.len() + self.hop);
        self.process_into(input, &mut out);
        out
    }

    /// Appends completed output samples to `output`. No allocation happens
    /// here once `output` has enough capacity.
    pub fn process_into(&mut self, input: &[f64], output: &mut Vec<f64>) {
        self.process_with(input, output, |_| {});
    }

    /// Like [`process_into`](Self::process_into), calling `on_frame` after
    /// every frame.
    pub fn process_with<F>(&mut self, input: &[f64], output: &mut Vec<f64>, mut on_frame: F)
    where
        F: FnMut(&FrameDiagnostics<'_>),
    {
        self.run(input, None, output, None, &mut on_frame);
    }

    /// Processes `input` while applying the identical per-frame gains to
    /// `shadow` (same length), which shows what the suppressor does to one
    /// component of a mixture.
    pub fn process_shadowed_into(
        &mut self,
        input: &[f64],
        shadow: &[f64],
        output: &mut Vec<f64>,
        shadow_output: &mut Vec<f64>,
    ) {
        assert_eq!(input.len(), shadow.len(), "shadow stream length");
        if self.shadow.is_none() {
            assert!(
                self.frames == 0 && self.pending_len == 0,
                "shadow stream must start with the main stream"
            );
            self.shadow = Some(self.new_shadow());
        }
        self.run(
            input,
            Some(shadow),
            output,
            Some(shadow_output),
            &mut |_| {},
        );
    }

    fn new_shadow(&self) -> ShadowPath {
        let n = self.config.frame_size;
        ShadowPath {
            hpf: self.hpf.clone().map(|mut h| {
                h.reset();
                h
            }),
            framer: Framer::new(self.hop),
            fwd: ForwardTransform::new(n).expect("validated frame size"),
            ola: OlaState::new(n, self.hop).expect("validated hop"),
            pending: vec![0.0; self.hop],
            frame: vec![0.0; n],
            spectrum: Spectrum::zeros(n, self.config.sample_rate_hz),
            out_block: vec![0.0; self.hop],
        }
    }

    fn run(
        &mut self,
        input: &[f64],
        shadow_in: Option<&[f64]>,
        output: &mut Vec<f64>,
        mut shadow_out: Option<&mut Vec<f64>>,
        on_frame: &mut dyn FnMut(&FrameDiagnostics<'_>),
    ) {
        let mut pos = 0;
        while pos < input.len() {
            let take = (self.hop - self.pending_len).min(input.len() - pos);
            let dst = &mut self.pending[self.pending_len..self.pending_len + take];
            for (d, &x) in dst.iter_mut().zip(&input[pos..pos + take]) {
                let x = clip(x);
                *d = match self.hpf.as_mut() {
                    Some(h) => h.process_sample(x),
                    None => x,
                };
            }
            if let (Some(sh), Some(src)) = (self.shadow.as_mut(), shadow_in) {
                let dst = &mut sh.pending[self.pending_len..self.pending_len + take];
                for (d, &x) in dst.iter_mut().zip(&src[pos..pos + take]) {
                    let x = clip(x);
                    *d = match sh.hpf.as_mut() {
                        Some(h) => h.process_sample(x),
                        None => x,
                    };
                }
            }
            self.pending_len += take;
            pos += take;
            if self.pending_len == self.hop {
                self.run_frame(shadow_in.is_some());
                self.pending_len = 0;
                output.extend_from_slice(&self.out_block);
                if let (Some(sh), Some(out)) = (self.shadow.as_ref(), shadow_out.as_deref_mut()) {
                    out.extend_from_slice(&sh.out_block);
                }
                on_frame(&self.diagnostics());
            }
        }
    }

    fn run_frame(&mut self, with_shadow: bool) {
        self.framer
            .push_into(&self.pending, &mut self.frame)
            .expect("pending block is one hop");
        self.fwd
            .process(&self.frame, &self.windows.analysis, &mut self.spectrum);
        band_rms_into(&self.spectrum, &self.layout, &mut self.band_rms);
        self.estimator.update(&self.band_rms);

        match self.config.engine {
            Engine::Proposed => {
                let cfg = self.config.suppression();
                let g = self
                    .gains
                    .update(self.estimator.level(), self.estimator.floor(), &cfg);
                expand_gains_into(g, &self.layout, self.config.dc_policy, &mut self.bin_gains);
            }
            Engine::Classic(pss) => {
                self.layout
                    .interpolate_into(self.estimator.floor(), &mut self.bin_noise);
                for ((g, bin), &noise) in self
                    .bin_gains
                    .iter_mut()
                    .zip(&self.spectrum.bins)
                    .zip(&self.bin_noise)
                {
                    *g = classic_gain(&pss, bin.norm_sqr(), noise * noise);
                }
                if self.config.dc_policy == DcPolicy::Zero {
                    self.bin_gains[0] = 0.0;
                }
                for (k, dst) in self.classic_band_gains.iter_mut().enumerate() {
                    let bins = self.layout.band_bins(k);
                    let width = bins.len() as f64;
                    *dst = self.bin_gains[bins].iter().sum::<f64>() / width;
                }
            }
        }

        self.ola.synthesize(
            &self.spectrum,
            &self.bin_gains,
            &self.windows,
            &mut self.out_block,
        );

        if with_shadow {
            if let Some(sh) = self.shadow.as_mut() {
                sh.framer
                    .push_into(&sh.pending, &mut sh.frame)
                    .expect("pending block is one hop");
                sh.fwd
                    .process(&sh.frame, &self.windows.analysis, &mut sh.spectrum);
                sh.ola.synthesize(
                    &sh.spectrum,
                    &self.bin_gains,
                    &self.windows,
                    &mut sh.out_block,
                );
            }
        }
        self.frames += 1;
    }

    /// Snapshot of the most recent frame.
    pub fn diagnostics(&self) -> FrameDiagnostics<'_> {
        let (raw, applied) = match self.config.engine {
            Engine::Proposed => (&self.gains.g_raw[..], &self.gains.g_prev[..]),
            Engine::Classic(_) => (&self.classic_band_gains[..], &self.classic_band_gains[..]),
        };
        FrameDiagnostics {
            frame_index: self.frames.saturating_sub(1),
            engine: self.config.engine,
            band_rms: &self.band_rms,
            band_level: self.estimator.level(),
            noise_floor: self.estimator.floor(),
            raw_gains: raw,
            band_gains: applied,
            bin_gains: &self.bin_gains,
        }
    }

    /// Emits the buffered tail so that the total output count equals the total
    /// input count, then returns the processor to its initial state.
    pub fn flush(&mut self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.hop);
        self.flush_into(&mut out);
        out
    }

    pub fn flush_into(&mut self, output: &mut Vec<f64>) {
        self.flush_impl(output, None);
    }

    pub fn flush_shadowed_into(&mut self, output: &mut Vec<f64>, shadow_output: &mut Vec<f64>) {
        self.flush_impl(output, Some(shadow_output));
    }

    fn flush_impl(&mut self, output: &mut Vec<f64>, shadow_output: Option<&mut Vec<f64>>) {
        let remaining = self.pending_len;
        if remaining > 0 {
            self.pending[remaining..].fill(0.0);
            let with_shadow = self.shadow.is_some() && shadow_output.is_some();
            if let Some(sh) = self.shadow.as_mut() {
                sh.pending[remaining..].fill(0.0);
            }
            self.run_frame(with_shadow);
            output.extend_from_slice(&self.out_block[..remaining]);
            if let (Some(sh), Some(out)) = (self.shadow.as_ref(), shadow_output) {
                out.extend_from_slice(&sh.out_block[..remaining]);
            }
        }
        self.reset();
    }

    /// Drops all stream state; the configuration is kept.
    pub fn reset(&mut self) {
        let fresh = Self::create(self.config).expect("current config already validated");
        *self = fresh;
    }

    /// Swaps parameters on a running stream; they take effect from the next
    /// frame. Sample rate, frame size and hop are fixed for the life of the
    /// processor.
    pub fn reconfigure(&mut self, config: NsConfig) -> Result<()> {
        config.validate()?;
        let old = self.config;
        if config.sample_rate_hz != old.sample_rate_hz {
            return Err(Error::Reconfigure {
                field: "sample_rate_hz",
                from: old.sample_rate_hz.to_string(),
                to: config.sample_rate_hz.to_string(),
            });
        }
        if config.frame_size != old.frame_size {
            return Err(Error::Reconfigure {
                field: "frame_size",
                from: old.frame_size.to_string(),
                to: config.frame_size.to_string(),
            });
        }
        if config.hop() != old.hop() {
            return Err(Error::Reconfigure {
                field: "hop_size",
                from: old.hop().to_string(),
                to: config.hop().to_string(),
            });
        }

        if config.window != old.window {
            self.windows = WolaWindows::new(config.window, config.frame_size, self.hop)?;
        }
        if config.hpf_cutoff_hz != old.hpf_cutoff_hz {
            self.hpf = match (self.hpf.take(), config.hpf_cutoff_hz > 0.0) {
                (_, false) => None,
                (Some(mut h), true) => {
                    h.retune(config.hpf_cutoff_hz)?;
                    Some(h)
                }
                (None, true) => make_hpf(&config)?,
            };
            if let Some(sh) = self.shadow.as_mut() {
                sh.hpf = match (sh.hpf.take(), &self.hpf) {
                    (_, None) => None,
                    (Some(mut h), Some(main)) => {
                        h.retune(main.cutoff_hz())?;
                        Some(h)
                    }
                    (None, Some(main)) => {
                        let mut h = main.clone();
                        h.reset();
                        Some(h)
                    }
                };
            }
        }

        if config.m_bands != old.m_bands {
            let n = config.frame_size;
            self.layout = build_layout(n, config.m_bands, config.sample_rate_hz)?;
            self.estimator = make_estimator(&config, &self.layout)?;
            self.gains = GainState::new(config.m_bands);
            self.band_rms = vec![0.0; config.m_bands];
            self.classic_band_gains = vec![1.0; config.m_bands];
        } else {
            if config.tracker_window_seconds != old.tracker_window_seconds {
                self.estimator.replace_tracker(MinTracker::from_duration(
                    config.m_bands,
                    config.tracker_window_seconds,
                    config.frames_per_second(),
                    config.sub_windows(),
                )?);
            }
            if config.band_smoothing != old.band_smoothing
                || config.tracker_bias != old.tracker_bias
            {
                self.estimator.set_band_smoothing(config.band_smoothing);
                self.estimator.set_bias(make_bias(&config, &self.layout));
            }
            if config.alpha != old.alpha {
                self.estimator.set_alpha(config.alpha);
            }
        }
        if config.max_suppression != old.max_suppression {
            self.gains.clamp_to(&config.suppression());
        }
        self.config = config;
        Ok(())
    }
}

impl std::fmt::Debug for NsProcessor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NsProcessor")
            .field("config", &self.config)
            .field("frames", &self.frames)
            .field("pending", &self.pending_len)
            .finish()
    }
}
