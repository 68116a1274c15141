use std::fmt;

use metaline::Error;

/// Failure classes with stable process exit codes.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad configuration or arguments: exit 2.
    Config(String),
    /// The analysis is not defined for this input: exit 3.
    Analysis(String),
    /// Unreadable, malformed or unusable data: exit 4.
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Analysis(_) => 3,
            CliError::Data(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Analysis(m) => write!(f, "analysis error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let m = e.to_string();
        match e {
            Error::InvalidElement(_)
            | Error::InvalidGrid(_)
            | Error::InvalidMask(_)
            | Error::InvalidConfig(_) => CliError::Config(m),
            Error::BandNotBracketed { .. } => CliError::Analysis(format!(
                "{m}; widen the sweep (--start/--stop) or check the element values"
            )),
            Error::EmptyCascade
            | Error::SingularConversion { .. }
            | Error::NonTransmissive { .. }
            | Error::InsufficientGrid { .. }
            | Error::Domain(_)
            | Error::SingularPoint { .. }
            | Error::NotFound(_)
            | Error::Coverage { .. } => CliError::Analysis(m),
            Error::InvalidSweep(_)
            | Error::NoOverlap
            | Error::Parse { .. }
            | Error::Unsupported(_)
            | Error::EmptySweep
            | Error::Csv(_)
            | Error::Io(_) => CliError::Data(m),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}
