//! Server misbehaviour models.
//!
//! A [`ServerActor`] sits between the client's instructions and the shared
//! state. It never forges classical messages; it can only skip gates it was
//! told to apply or measure qubits it holds.

use std::collections::BTreeSet;

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

/// Which part of a combined circuit an instruction belongs to. Only the
/// simulation knows this; the server never sees it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Original,
    Verifier,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropScope {
    All,
    OriginalOnly,
    VerifierOnly,
}

impl DropScope {
    pub fn admits(self, origin: Origin) -> bool {
        match self {
            DropScope::All => true,
            DropScope::OriginalOnly => origin == Origin::Original,
            DropScope::VerifierOnly => origin == Origin::Verifier,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ServerBehavior {
    Honest,
    /// Silently skip `count` instructed gates per run, chosen uniformly
    /// among the instructions in `scope`.
    DropRandomGate { count: usize, scope: DropScope },
    /// Measure the listed server ports in the Z basis whenever a qubit
    /// arrives on them, then carry on as instructed.
    MeasureAndResend { probes: Vec<u32> },
}

impl ServerBehavior {
    /// Parses `honest`, `drop:N`, `drop:N:original`, `drop:N:verifier` or
    /// `measure:W1,W2,...`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::BadArgument(format!("unrecognised adversary {text:?}"));
        let mut parts = text.split(':');
        match parts.next() {
            Some("honest") => Ok(ServerBehavior::Honest),
            Some("drop") => {
                let count = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
                let scope = match parts.next() {
                    None | Some("all") => DropScope::All,
                    Some("original") => DropScope::OriginalOnly,
                    Some("verifier") => DropScope::VerifierOnly,
                    _ => return Err(bad()),
                };
                Ok(ServerBehavior::DropRandomGate { count, scope })
            }
            Some("measure") => {
                let probes = parts
                    .next()
                    .ok_or_else(bad)?
                    .split(',')
                    .map(|w| w.trim().parse().map_err(|_| bad()))
                    .collect::<Result<Vec<u32>>>()?;
                Ok(ServerBehavior::MeasureAndResend { probes })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DroppedInstruction {
    pub index: usize,
    pub kind: String,
    pub wires: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub wire: u32,
    pub outcome: u8,
}

/// What the adversary did, kept apart from the honest transcript.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AdversaryLog {
    pub instructions_seen: usize,
    pub gates_applied: usize,
    pub dropped: Vec<DroppedInstruction>,
    pub probes: Vec<ProbeRecord>,
}

impl AdversaryLog {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A server with a behaviour attached.
pub struct ServerActor {
    behavior: ServerBehavior,
    drop: BTreeSet<usize>,
    rng: SimRng,
    log: AdversaryLog,
}

/// Attaches `behavior` to a server. Drop targets are fixed later with
/// [`ServerActor::plan_drops`].
pub fn wrap_server(behavior: &ServerBehavior, rng: SimRng) -> ServerActor {
    ServerActor { behavior: behavior.clone(), drop: BTreeSet::new(), rng, log: AdversaryLog::default() }
}

impl ServerActor {
    pub fn behavior(&self) -> &ServerBehavior {
        &self.behavior
    }

    /// Picks the instructions to skip, uniformly among `origins` entries
    /// admitted by the scope. `origins[i]` is the origin of instruction `i`
    /// in an honest run with the same seed.
    pub fn plan_drops(&mut self, origins: &[Origin]) {
        if let ServerBehavior::DropRandomGate { count, scope } = self.behavior {
            let candidates: Vec<usize> = (0..origins.len()).filter(|&i| scope.admits(origins[i])).collect();
            let k = count.min(candidates.len());
            self.drop = sample(&mut self.rng, candidates.len(), k).into_iter().map(|j| candidates[j]).collect();
        }
    }

    /// Called once per instruction, in order; returns whether to apply it.
    pub fn should_apply(&mut self, kind: &str, wires: &[u32]) -> bool {
        let index = self.log.instructions_seen;
        self.log.instructions_seen += 1;
        if self.drop.contains(&index) {
            self.log.dropped.push(DroppedInstruction { index, kind: kind.to_string(), wires: wires.to_vec() });
            false
        } else {
            self.log.gates_applied += 1;
            true
        }
    }

    /// Ports among `arrived` the adversary wants to measure.
    pub fn probes_in(&self, arrived: &[u32]) -> Vec<u32> {
        match &self.behavior {
            ServerBehavior::MeasureAndResend { probes } => arrived.iter().copied().filter(|w| probes.contains(w)).collect(),
            _ => Vec::new(),
        }
    }

    pub fn record_probe(&mut self, wire: u32, outcome: u8) {
        self.log.probes.push(ProbeRecord { wire, outcome });
    }

    pub fn rng(&mut self) -> &mut SimRng {
        &mut self.rng
    }

    pub fn log(&self) -> &AdversaryLog {
        &self.log
    }

    pub fn into_log(self) -> AdversaryLog {
        self.log
    }
}
