use std::fmt;
use std::path::PathBuf;

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(rbc_dekf::Error),
    Output { path: PathBuf, source: std::io::Error },
    /// A comparison finished but one of the filters failed numerically.
    FilterFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Core(rbc_dekf::Error::NumericalFailure { .. } | rbc_dekf::Error::Domain(_)) => EXIT_NUMERICAL,
            CliError::FilterFailed(_) => EXIT_NUMERICAL,
            // data, parameter and I/O errors, and a truth simulation pushed out
            // of range by its input, are all problems with what was supplied
            CliError::Core(_) | CliError::Output { .. } => EXIT_DATA,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Output { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::FilterFailed(m) => write!(f, "{m}"),
        }
    }
}

impl From<rbc_dekf::Error> for CliError {
    fn from(e: rbc_dekf::Error) -> Self {
        CliError::Core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
