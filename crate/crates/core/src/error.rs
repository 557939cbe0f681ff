//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by state construction, measurements and game evaluation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum QicError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("subsystem index {index} out of range for {count} subsystems")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("matrix is not Hermitian within tolerance (max asymmetry {0})")]
    NotHermitian(f64),
    #[error("operator trace deviates from 1 by {0}")]
    NotUnitTrace(f64),
    #[error("operator has negative eigenvalue {0}")]
    NotPositive(f64),
    #[error("state vector norm deviates from 1 by {0}")]
    NotNormalized(f64),
    #[error("Bloch vector norm deviates from 1 by {0}")]
    NotUnitVector(f64),
    #[error("Kraus operators do not satisfy the completeness relation (residual {0})")]
    NotCptp(f64),
    #[error("invalid bipartition: split at {split} of {count} subsystems")]
    InvalidPartition { split: usize, count: usize },
    #[error("subsystem {0} is not a qubit")]
    NonQubitSubsystem(usize),
    #[error("shared pair is not in the expected state (fidelity {0})")]
    WrongResourceState(f64),
    #[error("input is not within tolerance of any Bell state; cannot decode")]
    DecodeFailure,
    #[error("no exact random access code construction for n = {0} (supported: 2, 3, 4)")]
    UnsupportedEarac(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, QicError>;
