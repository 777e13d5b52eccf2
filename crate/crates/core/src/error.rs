use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("point {point:?} lies outside the domain")]
    OutsideDomain { point: [f64; 2] },

    #[error("modulus polynomial is reducible over GF({base})")]
    ReducibleModulus { base: u32 },

    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),

    #[error("block size mismatch: {columns} columns cannot be split into blocks of {beta}")]
    BlockSize { columns: usize, beta: usize },

    #[error("{digits} base-{base} digits exceed the 53-bit floating mantissa")]
    DigitDepth { base: u32, digits: usize },

    #[error("degenerate triangle {index} (area {area:e})")]
    DegenerateElement { index: usize, area: f64 },

    #[error("non-positive diffusivity {value:e} on element {element}")]
    NonPositiveKappa { element: usize, value: f64 },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("conjugate gradient did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("exponential sum cannot reach tolerance {tolerance:e} within {max_terms} terms")]
    ToleranceNotAchievable { tolerance: f64, max_terms: usize },

    #[error("{path}:{line}: {message}")]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("sample {index} failed: {source}")]
    Sample {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Short machine-readable code used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } | Error::OutsideDomain { .. } => "E_DOMAIN",
            Error::Config(_) => "E_CONFIG",
            Error::ReducibleModulus { .. }
            | Error::DegreeMismatch(_)
            | Error::BlockSize { .. }
            | Error::DigitDepth { .. } => "E_QMC",
            Error::DegenerateElement { .. } | Error::NonPositiveKappa { .. } => "E_FEM",
            Error::NotPositiveDefinite { .. }
            | Error::NoConvergence { .. }
            | Error::ToleranceNotAchievable { .. } => "E_SOLVER",
            Error::Parse { .. } => "E_PARSE",
            Error::Sample { source, .. } => source.code(),
            Error::Io { .. } => "E_IO",
        }
    }
}
