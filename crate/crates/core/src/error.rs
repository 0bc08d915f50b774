use thiserror::Error;

use crate::pattern::Pattern;

/// Errors shared by every operation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("precondition failed: {reason}; witness {pattern}")]
    Witness { reason: String, pattern: Pattern },
    #[error("inconclusive: {0}")]
    Inconclusive(String),
    #[error("search exhausted after {attempts} attempts")]
    Exhausted { attempts: usize },
    #[error("integer overflow: {0}")]
    Overflow(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}
