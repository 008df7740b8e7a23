use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of a model function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violated a parameter invariant.
    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    /// A filter step produced a non-positive innovation variance or a non-finite value.
    #[error("numerical failure at step {step}: {reason}")]
    NumericalFailure { step: usize, reason: String },

    /// The truth model left the admissible concentration range.
    #[error("simulation failure at sample {sample}: {reason}")]
    Simulation { sample: usize, reason: String },

    /// Malformed input data. `row` is 1-based and counts the header line.
    #[error("data error{}{}: {reason}", .row.map(|r| format!(" at row {r}")).unwrap_or_default(), .column.as_ref().map(|c| format!(", column `{c}`")).unwrap_or_default())]
    Data {
        row: Option<usize>,
        column: Option<String>,
        reason: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn param(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key: key.into(),
            reason: reason.into(),
        }
    }

    pub(crate) fn data(row: Option<usize>, column: Option<&str>, reason: impl Into<String>) -> Self {
        Error::Data {
            row,
            column: column.map(str::to_owned),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad input files or configuration rather than the numerics.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidParameter { .. } | Error::Data { .. } | Error::Io { .. } | Error::Csv(_)
        )
    }
}
