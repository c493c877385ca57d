use thiserror::Error;

/// Errors raised by sample construction, estimation, simulation and ingestion.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("value {value} at position {index} is not a finite positive number")]
    NonPositiveValue { index: usize, value: f64 },

    #[error("sample has {n} values, at least 2 are required")]
    TooSmall { n: usize },

    #[error("k = {k} is out of range for n = {n} (need {min} <= k <= n-1)")]
    KOutOfRange { k: usize, n: usize, min: usize },

    #[error("k0 = {k0} is out of range for k = {k} (need 0 <= k0 < k)")]
    K0OutOfRange { k0: usize, k: usize },

    #[error("trimmed Hill estimate is zero at k0 = {k0}, k = {k}: tied order statistics, dither or deduplicate the data")]
    DegenerateEstimate { k0: usize, k: usize },

    #[error("level q = {0} must lie in (0, 1)")]
    InvalidLevel(f64),

    #[error("weight a = {0} must be finite and > 1")]
    InvalidWeight(f64),

    #[error("ratio series has k = {series} but schedule has k = {schedule}")]
    MismatchedK { series: usize, schedule: usize },

    #[error("the |T| model has no closed-form quantile")]
    UnsupportedQuantile,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("k0 = {k0} outliers requested but the sample has only n = {n} values")]
    K0TooLarge { k0: usize, n: usize },

    #[error("no calibrated optimal k is available for {0}")]
    NoDefaultAvailable(String),

    #[error("input is empty")]
    Empty,

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: String,
        message: String,
    },

    #[error("selected column contains no values")]
    EmptyColumn,

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonPositiveValue { .. } => "non_positive_value",
            Error::TooSmall { .. } => "too_small",
            Error::KOutOfRange { .. } => "k_out_of_range",
            Error::K0OutOfRange { .. } => "k0_out_of_range",
            Error::DegenerateEstimate { .. } => "degenerate_estimate",
            Error::InvalidLevel(_) => "invalid_level",
            Error::InvalidWeight(_) => "invalid_weight",
            Error::MismatchedK { .. } => "mismatched_k",
            Error::UnsupportedQuantile => "unsupported_quantile",
            Error::Domain(_) => "domain_error",
            Error::K0TooLarge { .. } => "k0_too_large",
            Error::NoDefaultAvailable(_) => "no_default_available",
            Error::Empty => "empty",
            Error::Parse { .. } => "parse_error",
            Error::EmptyColumn => "empty_column",
            Error::Config(_) => "invalid_config",
        }
    }
}
