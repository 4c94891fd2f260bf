use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Inconsistent or incomplete setup (dimension mismatches, missing data).
    #[error("configuration error: {0}")]
    Config(String),

    /// A value outside its admissible range.
    #[error("validation error: {0}")]
    Validation(String),

    /// Evaluation outside the domain covered by tabulated data.
    #[error("extrapolation error: {0}")]
    Extrapolation(String),

    /// Quadrature non-convergence, degenerate traces and similar failures.
    #[error("numerical error: {message} (residual estimate {residual:e})")]
    Numerical { message: String, residual: f64 },

    #[error("I/O error: {0}")]
    Io(String),

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn numerical(message: impl Into<String>, residual: f64) -> Self {
        Error::Numerical {
            message: message.into(),
            residual,
        }
    }

    /// True for errors caused by bad user input rather than a failed computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Validation(_) | Error::Extrapolation(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
