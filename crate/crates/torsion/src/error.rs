use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument `{what}`: {why}")]
    Invalid { what: &'static str, why: String },

    #[error("non-finite {what} at u = {u}")]
    NonFinite { what: &'static str, u: f64 },

    #[error("mass matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("{what} did not converge after {iters} iterations")]
    NoConvergence { what: &'static str, iters: usize },

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("cutoff does not vanish on the singular set (u = {0})")]
    CutoffSupport(f64),

    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),

    #[error("spectrum has no nonzero eigenvalue")]
    NoNonzeroEigenvalue,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(what: &'static str, why: impl Into<String>) -> Result<T> {
    Err(Error::Invalid { what, why: why.into() })
}
