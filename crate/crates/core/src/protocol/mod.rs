//! Client/server protocols over a shared simulated state.
//!
//! All actors act on one global [`StateVector`]; sending a qubit moves its
//! custody, not its amplitudes. Servers only ever see port numbers, gate
//! kinds and (for the two-server protocol) angle shares.

mod engine;
mod message;
mod zero_qubit;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryLog, Origin, ServerBehavior};
use crate::circuit::{CapabilityProfile, TaggedCircuit, TrapPlan};
use crate::error::Result;
use crate::rng::Streams;
use crate::crypto::KeySourceMode;
use crate::sim::{Qubit, StateVector};

pub use engine::{run_protocol2, run_protocol3, server_parallel_step, ServerInstruction};
pub use message::{Actor, Message, MessageBody, RunSummary, ServerView, Transcript};
pub use zero_qubit::{run_protocol4, KeyDealer, ShareRecord};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    P2,
    P3,
    P4,
}

impl ProtocolKind {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::P2 => "p2",
            ProtocolKind::P3 => "p3",
            ProtocolKind::P4 => "p4",
        }
    }
}

/// Runs `circuit` under the protocol named by `kind`.
pub fn run_protocol(
    kind: ProtocolKind,
    circuit: &TaggedCircuit,
    profile: &CapabilityProfile,
    opts: &ProtocolOptions,
    streams: Streams,
) -> Result<ProtocolRun> {
    match kind {
        ProtocolKind::P2 => run_protocol2(circuit, profile, opts, streams),
        ProtocolKind::P3 => run_protocol3(circuit, profile, opts, streams),
        ProtocolKind::P4 => run_protocol4(circuit, profile, opts, streams),
    }
}

/// What the run returns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputMode {
    /// Leave every qubit unmeasured and return the decrypted joint state.
    Statevector,
    /// Measure each qubit in Z after its last gate.
    Measure,
}

#[derive(Clone, Debug)]
pub struct ProtocolOptions {
    pub output: OutputMode,
    /// Probability of a trap pair after each multi-qubit gate (Protocol 3
    /// and 4).
    pub trap_density: f64,
    /// Shuffle ports on every send. Defaults to on for Protocol 3 and off
    /// for Protocol 2.
    pub shuffle: Option<bool>,
    pub key_source: KeySourceMode,
    pub behavior: ServerBehavior,
    /// Hidden origin of each logical qubit, for scoped adversaries.
    pub origins: Option<Vec<Origin>>,
    /// Guard against scheduler bugs.
    pub max_iterations: usize,
}

impl Default for ProtocolOptions {
    fn default() -> Self {
        Self {
            output: OutputMode::Statevector,
            trap_density: 0.0,
            shuffle: None,
            key_source: KeySourceMode::Protocol1Literal,
            behavior: ServerBehavior::Honest,
            origins: None,
            max_iterations: 100_000,
        }
    }
}

impl ProtocolOptions {
    pub fn measured() -> Self {
        Self { output: OutputMode::Measure, ..Self::default() }
    }
}

/// Everything a protocol run produced.
#[derive(Clone, Debug)]
pub struct ProtocolRun {
    pub protocol: ProtocolKind,
    /// The circuit actually scheduled (after decomposition and traps).
    pub circuit: TaggedCircuit,
    pub trap_plan: TrapPlan,
    /// Decrypted joint state, in statevector mode.
    pub final_state: Option<StateVector>,
    /// Decrypted measurement outcomes, in measure mode.
    pub bits: BTreeMap<Qubit, u8>,
    pub transcript: Transcript,
    pub summary: RunSummary,
    /// Who ran each op of `circuit`.
    pub executed_by: Vec<Option<Actor>>,
    /// Origin of every gate instruction sent to a server, in order.
    pub instruction_origins: Vec<Origin>,
    pub adversary: AdversaryLog,
    /// Angle shares per split rotation (client ledger, two-server protocol).
    pub shares: Vec<ShareRecord>,
}

impl ProtocolRun {
    pub fn server_view(&self, server: u8) -> ServerView {
        self.transcript.server_view(Actor::Server(server))
    }

    /// Measured bits as a string, qubit 0 first.
    pub fn bitstring(&self) -> String {
        self.bits.values().map(|b| if *b == 1 { '1' } else { '0' }).collect()
    }
}
