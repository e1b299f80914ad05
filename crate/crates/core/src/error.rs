use thiserror::Error;

/// Errors surfaced by the library.
///
/// Capability errors are raised when a problem is validated, never in the
/// middle of an iteration: a [`crate::CpcFunction`] that compiled
/// successfully always has a resolvable proximal operator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("unsupported structure: {0}")]
    Capability(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("{routine} did not converge after {iterations} iterations")]
    NonConvergence { routine: &'static str, iterations: usize },

    #[error("undetermined: {0}")]
    Undetermined(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
