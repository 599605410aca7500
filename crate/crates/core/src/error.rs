use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("point {value} outside the admissible domain {domain}")]
    OutOfDomain { value: f64, domain: &'static str },

    #[error("price {price} outside [0, {s_max}]")]
    PriceOutOfRange { price: f64, s_max: f64 },

    #[error("degree {requested} exceeds the {available} stored recursion coefficients")]
    DegreeTooHigh { requested: usize, available: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error(
        "spectral series did not reach tolerance {tolerance:e} within {max_terms} terms \
         (dt = {dt:e}); raise the term cap or use a longer step"
    )]
    SeriesNotConverged { max_terms: usize, tolerance: f64, dt: f64 },

    #[error("non-positive likelihood term at observation {index}")]
    NonPositiveDensity { index: usize },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid data: {0}")]
    InvalidData(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    /// True for failures of a numerical method rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SeriesNotConverged { .. } | Error::NonPositiveDensity { .. } | Error::Singular(_)
        )
    }
}
