use thiserror::Error;

/// Library error type. Every variant renders as a single line starting with
/// a stable machine-greppable code (`E_PARSE`, `E_CYCLE`, ...).
#[derive(Debug, Error)]
pub enum Error {
    #[error("E_PARSE: line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("E_CYCLE: {0}")]
    Cycle(String),
    #[error("E_VALIDATE: {0}")]
    Validation(String),
    #[error("E_MODE: {0}")]
    Mode(String),
    #[error("E_NO_DEST: {0}")]
    NoDestination(String),
    #[error("E_DIST: {0}")]
    Distribution(String),
    #[error("E_INPUT: {0}")]
    InvalidInput(String),
    #[error("E_CAP: {0}")]
    CapExceeded(String),
    #[error("E_SAMPLING: {0}")]
    Sampling(String),
    #[error("E_IO: {0}")]
    Io(String),
}

impl Error {
    /// Stable error code, the first token of the rendered message.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse { .. } => "E_PARSE",
            Error::Cycle(_) => "E_CYCLE",
            Error::Validation(_) => "E_VALIDATE",
            Error::Mode(_) => "E_MODE",
            Error::NoDestination(_) => "E_NO_DEST",
            Error::Distribution(_) => "E_DIST",
            Error::InvalidInput(_) => "E_INPUT",
            Error::CapExceeded(_) => "E_CAP",
            Error::Sampling(_) => "E_SAMPLING",
            Error::Io(_) => "E_IO",
        }
    }

    /// Process exit code for CLI front-ends: 2 for parse/validation
    /// failures, 3 for exceeded computation caps.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CapExceeded(_) | Error::Sampling(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
