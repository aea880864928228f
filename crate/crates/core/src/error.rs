use thiserror::Error;

/// Errors raised by the kernel, grid, flow and entropy routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("accuracy error: {message} (achieved error estimate {estimate:e})")]
    Accuracy { message: String, estimate: f64 },
    #[error("search error: {0}")]
    Search(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("step-size error: {0}")]
    StepSize(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("format error: {0}")]
    Format(String),
}

impl Error {
    /// Short machine-readable tag used in JSON error records.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Accuracy { .. } => "accuracy",
            Error::Search(_) => "search",
            Error::Range(_) => "range",
            Error::StepSize(_) => "step_size",
            Error::Io(_) => "io",
            Error::Format(_) => "format",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
