use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Invalid parameters: empty supports, exponents out of range, bad windows.
    #[error("configuration error: {0}")]
    Config(String),
    /// An argument lies outside the object it refers to (site outside a box, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A size limit would be exceeded.
    #[error("resource limit: {0}")]
    Resource(String),
    /// An iterative kernel failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// A requested scale is finer than what the estimator can resolve.
    #[error("precision error: {0}")]
    Precision(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! config_err {
    ($($arg:tt)*) => { $crate::error::Error::Config(format!($($arg)*)) };
}
macro_rules! domain_err {
    ($($arg:tt)*) => { $crate::error::Error::Domain(format!($($arg)*)) };
}
pub(crate) use config_err;
pub(crate) use domain_err;
