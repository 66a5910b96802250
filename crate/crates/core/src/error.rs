use thiserror::Error;

/// Failures surfaced by the estimation stack.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Inconsistent dimensions, non-finite values or out-of-range parameters.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// A mathematical function evaluated outside its domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// The data do not support the requested estimate.
    #[error("estimation error: {0}")]
    Estimation(String),
    /// An exact combinatorial computation would exceed the configured budget.
    #[error("capacity exceeded: C({p}, {m}) = {subsets} subsets exceeds the cap of {cap}")]
    Capacity {
        p: usize,
        m: usize,
        subsets: u128,
        cap: u128,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn argument<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}

pub(crate) fn estimation<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Estimation(msg.into()))
}
