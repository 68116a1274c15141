use std::fmt;

use thiserror::Error;

/// Which side of a pass-band a 3-dB crossing was expected on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BandSide {
    Lower,
    Upper,
}

impl fmt::Display for BandSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BandSide::Lower => f.write_str("lower"),
            BandSide::Upper => f.write_str("upper"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid element: {0}")]
    InvalidElement(String),

    #[error("cascade of zero blocks")]
    EmptyCascade,

    #[error("singular ABCD to S conversion at {frequency_hz} Hz")]
    SingularConversion { frequency_hz: f64 },

    #[error("network does not transmit (s21 = 0) at {frequency_hz} Hz")]
    NonTransmissive { frequency_hz: f64 },

    #[error("need at least {needed} frequency points, got {got}")]
    InsufficientGrid { needed: usize, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid frequency grid: {0}")]
    InvalidGrid(String),

    #[error("invalid sweep table: {0}")]
    InvalidSweep(String),

    #[error("singular circuit response at {frequency_hz} Hz")]
    SingularPoint { frequency_hz: f64 },

    #[error("not found: {0}")]
    NotFound(String),

    #[error("pass-band not bracketed: no {side} 3-dB crossing inside the sweep")]
    BandNotBracketed { side: BandSide },

    #[error("{what} at {frequency_hz} Hz lies outside the sweep range [{start_hz}, {stop_hz}] Hz")]
    Coverage {
        what: String,
        frequency_hz: f64,
        start_hz: f64,
        stop_hz: f64,
    },

    #[error("frequency ranges do not overlap")]
    NoOverlap,

    #[error("invalid mask: {0}")]
    InvalidMask(String),

    #[error("invalid synthesis config: {0}")]
    InvalidConfig(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("empty sweep")]
    EmptySweep,

    #[error("csv: {0}")]
    Csv(String),

    #[error("i/o: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
