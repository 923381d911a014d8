use thiserror::Error;

use crate::sim::Qubit;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown qubit {0}")]
    UnknownQubit(Qubit),
    #[error("malformed gate: {0}")]
    BadGate(String),
    #[error("label sets differ between states")]
    LabelMismatch,
    #[error("bad argument: {0}")]
    BadArgument(String),
    #[error("no free slot available for literal key generation")]
    NoCapacity,
    #[error("cannot conjugate the correction frame through {0}")]
    UnsupportedConjugation(String),
    #[error("pending correction {0} spans a qubit not held by the decrypting party")]
    CorrectionNotLocal(String),
    #[error("circuit unsupported by client profile: {0}")]
    CircuitUnsupportedByProfile(String),
    #[error("scheduler made no progress: {0}")]
    SchedulerStuck(String),
    #[error("protocol violation: {0}")]
    ProtocolViolation(String),
    #[error("{0} qubits is too many to simulate")]
    TooLargeToSimulate(usize),
    #[error("verification unsupported: {0}")]
    VerificationUnsupported(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
