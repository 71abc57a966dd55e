use std::fmt;

/// A single violated configuration constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub field: &'static str,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &'static str, message: impl Into<String>) -> Self {
        Self {
            field,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(ConfigError),

    /// Every constraint that failed during configuration validation.
    #[error("invalid configuration ({} problems): {}", .0.len(), join(.0))]
    Invalid(Vec<ConfigError>),

    #[error("framing error: expected {expected} samples, got {actual}")]
    Framing { expected: usize, actual: usize },

    #[error(
        "cannot reconfigure {field} from {from} to {to} on a running processor; create a new processor instead"
    )]
    Reconfigure {
        field: &'static str,
        from: String,
        to: String,
    },
}

fn join(errors: &[ConfigError]) -> String {
    errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

impl From<ConfigError> for Error {
    fn from(e: ConfigError) -> Self {
        Error::Config(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
