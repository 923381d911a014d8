//! Simulation of private delegated quantum computation.
//!
//! A resource-poor client runs a circuit with the help of untrusted quantum
//! servers. Qubits travel encrypted under a quantum one-time pad, the client
//! keeps a correction frame for every gate the server applies, and confidential
//! rotation angles either stay on the client or are split between servers.
//! Everything runs on one exact statevector so the protocols can be checked
//! against plain simulation, and the server-visible transcript can be audited
//! for leaks.
//!
//! The main entry points are [`protocol::run_protocol2`],
//! [`protocol::run_protocol3`], [`protocol::run_protocol4`] and
//! [`verification::run_interleaved`].

pub mod adversary;
pub mod circuit;
pub mod crypto;
pub mod error;
pub mod protocol;
pub mod rng;
pub mod runner;
pub mod sim;
pub mod stats;
pub mod verification;

pub use error::{Error, Result};

#[cfg(test)]
#[path = "../tests/common/oracle.rs"]
mod oracle;
