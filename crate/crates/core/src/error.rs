use alloc::boxed::Box;
use alloc::string::String;

use crate::solver::Trajectory;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Inconsistent or out-of-range configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument outside the domain of the operation (negative time, bad exponent, ...).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("grid mismatch: expected {expected} cells, got {found}")]
    GridMismatch { expected: usize, found: usize },

    #[error("non-finite value at cell {index}")]
    NonFinite { index: usize },

    /// The state became non-finite. The trajectory recorded up to the last
    /// finite step is attached.
    #[error("blow-up at step {step}")]
    BlowUp { step: usize, partial: Box<Trajectory> },

    /// The explicit drift violated the Courant limit.
    #[error("drift stability violated at step {step}: courant number {courant:.3e} exceeds {limit}")]
    Stability { step: usize, courant: f64, limit: f64 },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
