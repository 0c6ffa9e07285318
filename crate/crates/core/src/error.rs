use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("series not converged after {terms} terms (last term {last_term:e}, partial sum {partial_sum:e})")]
    Truncation {
        terms: usize,
        last_term: f64,
        partial_sum: f64,
    },

    #[error("accuracy target missed: estimated error {estimate:e} > tolerance {tolerance:e} (value {value:e})")]
    Accuracy { value: f64, estimate: f64, tolerance: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("dominant eigenvalue is complex: {re:e} ± {im:e}i")]
    ComplexDominant { re: f64, im: f64 },

    #[error("eigensolver: {0}")]
    Eigen(String),
}

impl Error {
    /// Short machine-readable tag used in diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Truncation { .. } => "truncation",
            Error::Accuracy { .. } => "accuracy",
            Error::Config(_) => "config",
            Error::ComplexDominant { .. } => "complex_dominant",
            Error::Eigen(_) => "eigen",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
