//! Error type shared by every module of the crate.

use std::fmt;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by analysis operations.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Series shorter than the operation requires.
    InsufficientData { len: usize, min: usize },
    /// Input contains NaN or infinite values.
    NonFinite,
    /// Series carries no usable signal (e.g. zero variance, singular design).
    Degenerate(&'static str),
    /// Parameter outside its documented domain.
    Parameter(String),
    /// Malformed input text.
    Parse { line: usize, message: String },
    /// A year inside the requested span has no records at all.
    MissingYear { year: i32 },
    /// Two scalograms do not share time and scale grids.
    GridMismatch,
    /// Coherence requested with smoothing disabled; the result would be
    /// identically one.
    UnsmoothedCoherence,
    /// Filesystem failure while reading inputs or writing artifacts.
    Io(String),
    /// Invalid run configuration.
    Config(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InsufficientData { len, min } => {
                write!(f, "insufficient data: {len} points, need at least {min}")
            }
            Error::NonFinite => write!(f, "input contains non-finite values"),
            Error::Degenerate(what) => write!(f, "degenerate series: {what}"),
            Error::Parameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::Parse { line, message } => write!(f, "parse error at line {line}: {message}"),
            Error::MissingYear { year } => write!(f, "no records for year {year}"),
            Error::GridMismatch => write!(f, "time/scale grids do not match"),
            Error::UnsmoothedCoherence => {
                write!(
                    f,
                    "coherence without smoothing is identically 1; enable smoothing"
                )
            }
            Error::Io(msg) => write!(f, "i/o error: {msg}"),
            Error::Config(msg) => write!(f, "configuration error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
