use thiserror::Error;

/// Every failure the library reports. Degenerate reconstructions are not
/// errors; they travel as [`crate::Flag`] values inside reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CertError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("modulus {0} is not prime")]
    NotPrime(u64),

    #[error("insufficient data: need at least {needed} window sums, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("rate at index {0} equals 1; block-sum amplitude is singular")]
    SingularRate(usize),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("noise level {eps} exceeds the admissible regime eps0 = {eps0}")]
    OutOfRegime { eps: f64, eps0: f64 },

    #[error("ratio {ratio} of candidate {index} lies outside the band [{lower}, {upper}]")]
    BandViolation {
        index: usize,
        ratio: f64,
        lower: f64,
        upper: f64,
    },

    #[error("sequence leaves the nonnegative ambient class at index {0}")]
    AmbientClass(usize),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, CertError>;
