use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid quadrature size: {0}")]
    InvalidQuadrature(String),

    #[error("non-finite integrand value {value} at node {index} (theta={theta}, phi={phi})")]
    NonFinite {
        index: usize,
        theta: f64,
        phi: f64,
        value: f64,
    },

    #[error("matrix is singular or indefinite (smallest eigenvalue {min_eigenvalue:e})")]
    Singular { min_eigenvalue: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("too many degenerate Monte Carlo draws: {bad} of {total} ({what})")]
    DegenerateDraws {
        what: &'static str,
        bad: usize,
        total: usize,
    },

    #[error("ill-conditioned estimation problem: {0}")]
    IllConditioned(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::Singular { .. }
                | Error::DegenerateDraws { .. }
                | Error::IllConditioned(_)
        )
    }
}
