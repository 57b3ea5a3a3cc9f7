use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum HeatkError {
    /// A parameter is outside the validity domain of the requested operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A time below the configured floor was requested; the series cost and
    /// precision requirements grow without bound as t decreases.
    #[error("time {t} is below the configured floor {t_min}; refusing (series cost blow-up)")]
    TimeBelowFloor { t: f64, t_min: f64 },

    /// A quantity required by the caller was not supplied.
    #[error("missing input: {0}")]
    MissingInput(String),

    /// Internal numerical failure (precision exhausted, iteration did not
    /// converge). Indicates a bug or an input far outside the tested range.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, HeatkError>;
