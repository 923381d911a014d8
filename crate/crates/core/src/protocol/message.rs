use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actor {
    Client,
    Server(u8),
    CommonNode,
    KeyDealer,
}

impl fmt::Display for Actor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Actor::Client => write!(f, "client"),
            Actor::Server(i) => write!(f, "server{i}"),
            Actor::CommonNode => write!(f, "common_node"),
            Actor::KeyDealer => write!(f, "key_dealer"),
        }
    }
}

/// Message payloads. Qubits are named by server-side port ("wire") numbers;
/// the logical labels never leave the client.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum MessageBody {
    QubitTransfer { wires: Vec<u32> },
    /// Fetch request for the listed ports.
    QubitRequest { wires: Vec<u32> },
    Instruction {
        kind: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        params: Vec<f64>,
        wires: Vec<u32>,
    },
    MeasureRequest { wires: Vec<u32> },
    MeasureResult { wire: u32, bit: u8 },
    /// New port of each relabelled qubit: `(old, new)` pairs.
    RelabelNotice { pairs: Vec<(u32, u32)> },
    /// Pad bits handed to the encrypting server, one `(a, b)` per wire.
    KeyDelivery { wires: Vec<u32>, keys: Vec<(u8, u8)> },
}

impl MessageBody {
    pub fn type_name(&self) -> &'static str {
        match self {
            MessageBody::QubitTransfer { .. } => "qubit_transfer",
            MessageBody::QubitRequest { .. } => "qubit_request",
            MessageBody::Instruction { .. } => "instruction",
            MessageBody::MeasureRequest { .. } => "measure_request",
            MessageBody::MeasureResult { .. } => "measure_result",
            MessageBody::RelabelNotice { .. } => "relabel_notice",
            MessageBody::KeyDelivery { .. } => "key_delivery",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub seq: u64,
    pub sender: Actor,
    pub receiver: Actor,
    #[serde(flatten)]
    pub body: MessageBody,
}

/// Append-only log of every message of a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    messages: Vec<Message>,
}

impl Transcript {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, sender: Actor, receiver: Actor, body: MessageBody) -> u64 {
        let seq = self.messages.len() as u64;
        self.messages.push(Message { seq, sender, receiver, body });
        seq
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    /// Everything `server` sent or received.
    pub fn server_view(&self, server: Actor) -> ServerView {
        let events = self
            .messages
            .iter()
            .filter(|m| m.sender == server || m.receiver == server)
            .cloned()
            .collect();
        ServerView { server, events }
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> Result<()> {
        for m in &self.messages {
            serde_json::to_writer(&mut out, m)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("json is utf-8")
    }
}

/// The slice of a transcript one server can observe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ServerView {
    pub server: Actor,
    pub events: Vec<Message>,
}

impl ServerView {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn instructions(&self) -> impl Iterator<Item = (&str, &[f64], &[u32])> {
        self.events.iter().filter_map(|m| match &m.body {
            MessageBody::Instruction { kind, params, wires } => Some((kind.as_str(), params.as_slice(), wires.as_slice())),
            _ => None,
        })
    }

    /// Every floating-point value the server saw.
    pub fn floats(&self) -> Vec<f64> {
        self.instructions().flat_map(|(_, p, _)| p.iter().copied()).collect()
    }

    /// Message type names in order.
    pub fn type_sequence(&self) -> Vec<&'static str> {
        self.events.iter().map(|m| m.body.type_name()).collect()
    }

    /// Gate-kind multisets of the instructions between consecutive qubit
    /// transfers.
    pub fn gate_kinds_per_round(&self) -> Vec<Vec<String>> {
        let mut rounds = vec![Vec::new()];
        for m in &self.events {
            match &m.body {
                MessageBody::QubitTransfer { .. } => rounds.push(Vec::new()),
                MessageBody::Instruction { kind, .. } => rounds.last_mut().unwrap().push(kind.clone()),
                _ => {}
            }
        }
        for r in &mut rounds {
            r.sort();
        }
        rounds
    }
}

/// Aggregate counters of one run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub protocol: String,
    pub n_qubits: usize,
    pub client_capacity: usize,
    /// Qubit-transfer messages from the client.
    pub sends: usize,
    /// Client/server exchange rounds after the generation phase.
    pub rounds: usize,
    pub max_client_holdings: usize,
    pub server_instructions: usize,
    pub client_gates: usize,
    pub keys_drawn: usize,
    pub measurements: usize,
    /// Messages exchanged; one tick each.
    pub ticks: u64,
}
