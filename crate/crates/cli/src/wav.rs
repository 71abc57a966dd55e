//! WAV file I/O with samples held as per-channel `f64` in [-1, 1].

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use hound::{SampleFormat as HoundFormat, WavSpec};

use crate::error::{wav_err, CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleFormat {
    #[default]
    Pcm16,
    Pcm24,
    Float32,
}

impl SampleFormat {
    fn spec(self) -> (u16, HoundFormat) {
        match self {
            SampleFormat::Pcm16 => (16, HoundFormat::Int),
            SampleFormat::Pcm24 => (24, HoundFormat::Int),
            SampleFormat::Float32 => (32, HoundFormat::Float),
        }
    }
}

impl fmt::Display for SampleFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleFormat::Pcm16 => "pcm16",
            SampleFormat::Pcm24 => "pcm24",
            SampleFormat::Float32 => "float32",
        })
    }
}

impl FromStr for SampleFormat {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "pcm16" | "16" => Ok(SampleFormat::Pcm16),
            "pcm24" | "24" => Ok(SampleFormat::Pcm24),
            "float32" | "f32" | "float" => Ok(SampleFormat::Float32),
            other => Err(format!(
                "unknown sample format '{other}' (pcm16, pcm24, float32)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WavStream {
    pub sample_rate_hz: u32,
    pub sample_format: SampleFormat,
    /// One vector per channel, all the same length.
    pub channels: Vec<Vec<f64>>,
}

impl WavStream {
    pub fn mono(sample_rate_hz: u32, sample_format: SampleFormat, samples: Vec<f64>) -> Self {
        Self {
            sample_rate_hz,
            sample_format,
            channels: vec![samples],
        }
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let reader = hound::WavReader::open(path).map_err(wav_err(path))?;
        let spec = reader.spec();
        let format = match (spec.sample_format, spec.bits_per_sample) {
            (HoundFormat::Int, 16) => SampleFormat::Pcm16,
            (HoundFormat::Int, 24) => SampleFormat::Pcm24,
            (HoundFormat::Float, 32) => SampleFormat::Float32,
            (fmt, bits) => {
                return Err(CliError::Unsupported {
                    path: path.to_path_buf(),
                    reason: format!("{bits}-bit {fmt:?} (expected PCM16, PCM24 or Float32)"),
                })
            }
        };
        let n_ch = usize::from(spec.channels);
        if n_ch == 0 {
            return Err(CliError::Unsupported {
                path: path.to_path_buf(),
                reason: "zero channels".into(),
            });
        }
        let frames = reader.duration() as usize;
        let mut channels = vec![Vec::with_capacity(frames); n_ch];
        match format {
            SampleFormat::Float32 => {
                for (i, s) in reader.into_samples::<f32>().enumerate() {
                    channels[i % n_ch].push(f64::from(s.map_err(wav_err(path))?));
                }
            }
            SampleFormat::Pcm16 | SampleFormat::Pcm24 => {
                let scale = f64::from(1u32 << (spec.bits_per_sample - 1));
                for (i, s) in reader.into_samples::<i32>().enumerate() {
                    channels[i % n_ch].push(f64::from(s.map_err(wav_err(path))?) / scale);
                }
            }
        }
        Ok(Self {
            sample_rate_hz: spec.sample_rate,
            sample_format: format,
            channels,
        })
    }

    /// Writes the stream; integer formats round and saturate.
    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        if self.channels.iter().any(|c| c.len() != self.len()) {
            return Err(CliError::Shape("channels differ in length".into()));
        }
        let (bits, fmt) = self.sample_format.spec();
        let spec = WavSpec {
            channels: u16::try_from(self.channel_count())
                .map_err(|_| CliError::Shape("too many channels".into()))?,
            sample_rate: self.sample_rate_hz,
            bits_per_sample: bits,
            sample_format: fmt,
        };
        let mut writer = hound::WavWriter::create(path, spec).map_err(wav_err(path))?;
        for i in 0..self.len() {
            for ch in &self.channels {
                let x = ch[i];
                match self.sample_format {
                    SampleFormat::Float32 => writer.write_sample(x as f32),
                    SampleFormat::Pcm16 => writer.write_sample(quantize(x, 16) as i16),
                    SampleFormat::Pcm24 => writer.write_sample(quantize(x, 24)),
                }
                .map_err(wav_err(path))?;
            }
        }
        writer.finalize().map_err(wav_err(path))
    }
}

fn quantize(x: f64, bits: u32) -> i32 {
    let scale = f64::from(1u32 << (bits - 1));
    let x = if x.is_nan() { 0.0 } else { x };
    (x * scale).round().clamp(-scale, scale - 1.0) as i32
}
