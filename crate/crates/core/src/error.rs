use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Arguments outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A table, bit vector or enumeration guard is too small for the request.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// A value does not fit the exact integer path; use the log-space path.
    #[error("range error: {0}")]
    Range(String),

    /// More distinct k-sets were requested than exist.
    #[error("infeasible: requested {requested} distinct sets but only {available} exist")]
    Infeasible { requested: u128, available: u128 },

    /// Duplicate rejection gave up; the family is too dense for rejection sampling.
    #[error("sampler saturated after {draws} draws while collecting {target} distinct sets")]
    Saturation { draws: u64, target: u64 },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
