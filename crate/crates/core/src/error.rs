use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("no exact window for N = {target}: index residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    NoExactWindow { target: i64, residual: f64, tol: f64 },

    #[error("y = {y} lies outside the window [{lo}, {hi}]")]
    OutOfWindow { y: f64, lo: f64, hi: f64 },

    #[error("t = {t} lies outside the image interval [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("inversion did not converge for t = {0}")]
    NoConvergence(f64),

    #[error("floor of value at n = {n} is ambiguous: within {distance:.3e} of an integer in extended precision")]
    AmbiguousFloor { n: u64, distance: f64 },

    #[error("tan(log {0}) is not positive")]
    DomainError(u64),

    #[error("range bound {bound} exceeds the configured ceiling {ceiling}")]
    RangeTooLarge { bound: u64, ceiling: u64 },

    #[error("invalid range ({a}, {b}]")]
    InvalidRange { a: f64, b: f64 },

    #[error("value table has {values} entries but {logs} log weights")]
    WindowMismatch { values: usize, logs: usize },

    #[error("input too large: {0}")]
    TooLarge(String),

    #[error("integer grid of {points} points exceeds the limit {limit}")]
    BandTooWide { points: u64, limit: u64 },

    #[error("singular coefficient: |h + x| = {0:.3e}")]
    Singular(f64),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Resource errors (exit status 4) as opposed to domain errors (3).
    pub fn is_resource(&self) -> bool {
        matches!(
            self,
            Error::RangeTooLarge { .. }
                | Error::TooLarge(_)
                | Error::BandTooWide { .. }
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
