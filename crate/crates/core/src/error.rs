use thiserror::Error;

/// Errors produced anywhere in the transition pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed audio container: {0}")]
    Format(String),
    #[error("unsupported audio encoding: {0}")]
    Unsupported(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("invalid transform size {0}: must be a power of two")]
    Size(usize),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("input too short: {0}")]
    TooShort(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("incompatible tempi {tempo_a:.2} and {tempo_b:.2} BPM (stretch ratio {ratio:.3} outside [0.5, 2.0])")]
    IncompatibleTempo {
        tempo_a: f64,
        tempo_b: f64,
        ratio: f64,
    },
    #[error("low-confidence tempo estimate for {0}; pass --force-tempo to continue")]
    LowConfidence(&'static str),
    #[error("image encoding failed: {0}")]
    Image(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit status used by the command-line tool for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Format(_) | Error::Unsupported(_) => 2,
            Error::IncompatibleTempo { .. } => 3,
            Error::TooShort(_) => 4,
            Error::LowConfidence(_) => 5,
            _ => 1,
        }
    }
}
