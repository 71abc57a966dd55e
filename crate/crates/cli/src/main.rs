use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use ns_cli::fixtures::{synthesize_fixtures, FixtureOptions, DEFAULT_SEED};
use ns_cli::metrics::{measure, MeasureOptions};
use ns_cli::settings::{build_config, describe, read_settings};
use ns_cli::{denoise, mix, SampleFormat, WavStream};

#[derive(Parser)]
#[command(
    name = "nsuppress",
    version,
    about = "Subband noise suppression for WAV files"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Suppress noise in a WAV file
    Denoise(DenoiseArgs),
    /// Mix speech with noise at a target SNR
    Mix(MixArgs),
    /// Compare noisy and processed files against a clean reference
    Measure(MeasureArgs),
    /// Write the synthetic test signals
    Fixtures(FixtureArgs),
}

/// Engine settings. Each maps onto the key of the same name in a config file.
#[derive(Args, Default)]
#[command(next_help_heading = "Engine")]
struct EngineFlags {
    /// Flat key=value settings file; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Maximum suppression in dB (18 gives a gain floor of 0.1259)
    #[arg(long, allow_hyphen_values = true)]
    max_suppression_db: Option<String>,
    /// Maximum suppression as a linear gain floor in (0, 1]
    #[arg(long, allow_hyphen_values = true)]
    max_suppression: Option<String>,
    /// Over-subtraction factor
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    frame_size: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    hop_size: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    bands: Option<String>,
    /// hann, hamming or raised-cosine[:rolloff]
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    /// High-pass cutoff in Hz, 0 to disable
    #[arg(long, allow_hyphen_values = true)]
    hpf: Option<String>,
    /// proposed, power, magnitude or wiener
    #[arg(long, allow_hyphen_values = true)]
    engine: Option<String>,
    /// Noise floor smoothing factor
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta_min: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta_max: Option<String>,
    /// Minimum tracking window in seconds
    #[arg(long, allow_hyphen_values = true)]
    tracker_window: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    band_smoothing: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tracker_bias: Option<String>,
    /// zero or pass
    #[arg(long, allow_hyphen_values = true)]
    dc: Option<String>,
}

impl EngineFlags {
    fn pairs(&self) -> Vec<(String, String)> {
        let fields = [
            ("max-suppression-db", &self.max_suppression_db),
            ("max-suppression", &self.max_suppression),
            ("mu", &self.mu),
            ("frame-size", &self.frame_size),
            ("hop-size", &self.hop_size),
            ("bands", &self.bands),
            ("window", &self.window),
            ("hpf", &self.hpf),
            ("engine", &self.engine),
            ("alpha", &self.alpha),
            ("beta-min", &self.beta_min),
            ("beta-max", &self.beta_max),
            ("tracker-window", &self.tracker_window),
            ("band-smoothing", &self.band_smoothing),
            ("tracker-bias", &self.tracker_bias),
            ("dc", &self.dc),
        ];
        fields
            .into_iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| (k.to_string(), v.clone())))
            .collect()
    }

    fn config_for(&self, sample_rate_hz: u32) -> Result<ns_core::NsConfig> {
        let file = match &self.config {
            Some(p) => read_settings(p)?,
            None => Vec::new(),
        };
        Ok(build_config(
            f64::from(sample_rate_hz),
            &file,
            &self.pairs(),
        )?)
    }
}

#[derive(Args)]
struct DenoiseArgs {
    input: PathBuf,
    output: PathBuf,
    /// Write per-frame band gains and noise floors as CSV
    #[arg(long)]
    diagnostics: Option<PathBuf>,
    #[command(flatten)]
    engine: EngineFlags,
}

#[derive(Args)]
struct MixArgs {
    speech: PathBuf,
    noise: PathBuf,
    /// Target SNR in dB; "inf" adds no noise
    #[arg(long, allow_negative_numbers = true)]
    snr: f64,
    #[arg(short, long)]
    output: PathBuf,
    /// Also write the speech with the mixture's normalization applied
    #[arg(long)]
    clean_out: Option<PathBuf>,
}

#[derive(Args)]
struct MeasureArgs {
    clean: PathBuf,
    noisy: PathBuf,
    processed: PathBuf,
    /// Samples by which the processed file lags the others
    #[arg(long, default_value_t = 0)]
    latency: usize,
    /// Leading seconds excluded from every statistic
    #[arg(long, default_value_t = 0.0)]
    skip: f64,
    /// Channel to evaluate
    #[arg(long, default_value_t = 0)]
    channel: usize,
}

#[derive(Args)]
struct FixtureArgs {
    output_dir: PathBuf,
    #[arg(long, default_value_t = 16000)]
    sample_rate: u32,
    #[arg(long, default_value_t = 10.0)]
    seconds: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// pcm16, pcm24 or float32
    #[arg(long, default_value = "float32")]
    format: SampleFormat,
}

fn run_denoise(a: DenoiseArgs) -> Result<()> {
    let input = WavStream::read(&a.input)?;
    let cfg = a.engine.config_for(input.sample_rate_hz)?;
    eprintln!("{}", describe(&cfg));
    let s = denoise::denoise_file(&a.input, &a.output, cfg, a.diagnostics.as_deref())
        .with_context(|| format!("denoising {}", a.input.display()))?;
    println!(
        "wrote {} ({} ch, {} samples at {} Hz, latency compensated by {} samples)",
        a.output.display(),
        s.channels,
        s.samples,
        s.sample_rate_hz,
        s.latency_samples
    );
    Ok(())
}

fn run_mix(a: MixArgs) -> Result<()> {
    let s = mix::mix_files(
        &a.speech,
        &a.noise,
        a.snr,
        &a.output,
        a.clean_out.as_deref(),
    )?;
    println!(
        "noise gain {:.6} ({:.2} dB), normalization {:.6} ({:.2} dB)",
        s.noise_gain,
        20.0 * s.noise_gain.log10(),
        s.normalization,
        20.0 * s.normalization.log10()
    );
    Ok(())
}

fn channel(w: &WavStream, c: usize, path: &std::path::Path) -> Result<Vec<f64>> {
    w.channels
        .get(c)
        .cloned()
        .with_context(|| format!("{}: no channel {c}", path.display()))
}

fn run_measure(a: MeasureArgs) -> Result<()> {
    let clean = WavStream::read(&a.clean)?;
    let noisy = WavStream::read(&a.noisy)?;
    let processed = WavStream::read(&a.processed)?;
    let fs = clean.sample_rate_hz;
    if noisy.sample_rate_hz != fs || processed.sample_rate_hz != fs {
        anyhow::bail!(
            "sample rates differ: clean {fs} Hz, noisy {} Hz, processed {} Hz",
            noisy.sample_rate_hz,
            processed.sample_rate_hz
        );
    }
    let opts = MeasureOptions {
        latency: a.latency,
        skip_seconds: a.skip,
        ..MeasureOptions::for_sample_rate(f64::from(fs))
    };
    let report = measure(
        &channel(&clean, a.channel, &a.clean)?,
        &channel(&noisy, a.channel, &a.noisy)?,
        &channel(&processed, a.channel, &a.processed)?,
        f64::from(fs),
        &opts,
    )?;
    print!("{report}");
    Ok(())
}

fn run_fixtures(a: FixtureArgs) -> Result<()> {
    let opts = FixtureOptions {
        sample_rate_hz: a.sample_rate,
        seconds: a.seconds,
        seed: a.seed,
        format: a.format,
    };
    for f in synthesize_fixtures(&a.output_dir, &opts)? {
        println!(
            "{:<8} {} ({:.1} dBFS rms)",
            f.kind.name(),
            f.path.display(),
            20.0 * f.rms.log10()
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Denoise(a) => run_denoise(a),
        Command::Mix(a) => run_mix(a),
        Command::Measure(a) => run_measure(a),
        Command::Fixtures(a) => run_fixtures(a),
    }
}
