use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Wav {
        path: PathBuf,
        #[source]
        source: hound::Error,
    },
    #[error("{path}: unsupported WAV format: {reason}")]
    Unsupported { path: PathBuf, reason: String },
    #[error(transparent)]
    Core(#[from] ns_core::Error),
    #[error("{path}:{line}: {message}")]
    ConfigFile {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("sample rate mismatch: speech {speech} Hz, noise {noise} Hz")]
    RateMismatch { speech: u32, noise: u32 },
    #[error("speech signal is silent; SNR is undefined")]
    SilentSpeech,
    #[error("noise signal is empty or silent")]
    SilentNoise,
    #[error(
        "length mismatch after latency compensation ({latency} samples): \
         clean {clean}, noisy {noisy}, processed {processed}"
    )]
    LengthMismatch {
        clean: usize,
        noisy: usize,
        processed: usize,
        latency: usize,
    },
    #[error("inputs disagree: {0}")]
    Shape(String),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
    let path = path.into();
    move |source| CliError::Io { path, source }
}

pub(crate) fn wav_err(path: impl Into<PathBuf>) -> impl FnOnce(hound::Error) -> CliError {
    let path = path.into();
    move |source| match source {
        hound::Error::IoError(source) => CliError::Io { path, source },
        source => CliError::Wav { path, source },
    }
}
