use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{Gate, GateKind, Qubit};

/// Privacy class of a circuit operation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    /// Carries no confidential information; may be delegated in the clear.
    Public,
    /// The rotation angle is confidential.
    PrivateAngle,
    /// The presence or placement of the gate is confidential.
    PrivateStructure,
}

impl Tag {
    pub fn is_private(self) -> bool {
        self != Tag::Public
    }
}

/// Why an operation is in the circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OpRole {
    #[default]
    Circuit,
    /// One half of a self-cancelling trap pair.
    Trap { pair: usize },
    /// Client-side identity forcing a round trip between the halves of a trap pair.
    Request { pair: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CircuitOp {
    pub gate: Gate,
    pub tag: Tag,
    pub role: OpRole,
}

impl CircuitOp {
    pub fn is_circuit_gate(&self) -> bool {
        self.role == OpRole::Circuit
    }
}

/// Ordered gate list with per-gate privacy tags.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TaggedCircuit {
    n_qubits: usize,
    ops: Vec<CircuitOp>,
}

/// Per-qubit dependency links: `preds[i]` are the immediately preceding ops
/// sharing a qubit with op `i`.
#[derive(Clone, Debug)]
pub struct Dag {
    pub preds: Vec<Vec<usize>>,
    pub succs: Vec<Vec<usize>>,
}

impl TaggedCircuit {
    pub fn new(n_qubits: usize) -> Self {
        Self { n_qubits, ops: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn qubits(&self) -> impl Iterator<Item = Qubit> {
        (0..self.n_qubits as u32).map(Qubit)
    }

    pub fn ops(&self) -> &[CircuitOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn push(&mut self, gate: Gate, tag: Tag) -> Result<&mut Self> {
        self.push_op(CircuitOp { gate, tag, role: OpRole::Circuit })
    }

    pub fn push_op(&mut self, op: CircuitOp) -> Result<&mut Self> {
        op.gate.validate()?;
        if let Some(q) = op.gate.targets.iter().find(|q| q.0 as usize >= self.n_qubits) {
            return Err(Error::UnknownQubit(*q));
        }
        self.ops.push(op);
        Ok(self)
    }

    /// Builder-style `push` for hand-written circuits.
    pub fn with(mut self, gate: Gate, tag: Tag) -> Result<Self> {
        self.push(gate, tag)?;
        Ok(self)
    }

    pub fn gates(&self) -> impl Iterator<Item = &Gate> + Clone {
        self.ops.iter().map(|op| &op.gate)
    }

    /// Only the ops with [`OpRole::Circuit`].
    pub fn circuit_gates(&self) -> impl Iterator<Item = &CircuitOp> {
        self.ops.iter().filter(|op| op.is_circuit_gate())
    }

    pub fn dag(&self) -> Dag {
        let mut last: Vec<Option<usize>> = vec![None; self.n_qubits];
        let mut preds = Vec::with_capacity(self.ops.len());
        let mut succs = vec![Vec::new(); self.ops.len()];
        for (i, op) in self.ops.iter().enumerate() {
            let mut p: Vec<usize> = op.gate.targets.iter().filter_map(|q| last[q.0 as usize]).collect();
            p.sort_unstable();
            p.dedup();
            for &j in &p {
                succs[j].push(i);
            }
            for q in &op.gate.targets {
                last[q.0 as usize] = Some(i);
            }
            preds.push(p);
        }
        Dag { preds, succs }
    }

    /// Index of the last op touching each qubit, if any.
    pub fn last_use(&self) -> Vec<Option<usize>> {
        let mut last = vec![None; self.n_qubits];
        for (i, op) in self.ops.iter().enumerate() {
            for q in &op.gate.targets {
                last[q.0 as usize] = Some(i);
            }
        }
        last
    }

    /// Histogram of gate kind names over circuit (non-trap) ops.
    pub fn kind_histogram(&self) -> std::collections::BTreeMap<&'static str, usize> {
        let mut h = std::collections::BTreeMap::new();
        for op in self.circuit_gates() {
            *h.entry(op.gate.kind.name()).or_insert(0) += 1;
        }
        h
    }

    /// All angles carried by private-angle gates.
    pub fn private_angles(&self) -> Vec<f64> {
        self.ops
            .iter()
            .filter(|op| op.tag == Tag::PrivateAngle)
            .filter_map(|op| op.gate.kind.angle())
            .collect()
    }

    /// Places `other` on fresh qubits `n..n+other.n` after this circuit's ops.
    pub fn disjoint_union(&self, other: &TaggedCircuit) -> TaggedCircuit {
        let offset = self.n_qubits as u32;
        let mut out = TaggedCircuit::new(self.n_qubits + other.n_qubits);
        out.ops = self.ops.clone();
        out.ops.extend(other.ops.iter().map(|op| {
            let mut op = op.clone();
            for q in &mut op.gate.targets {
                q.0 += offset;
            }
            op
        }));
        out
    }

    pub(crate) fn from_parts(n_qubits: usize, ops: Vec<CircuitOp>) -> Self {
        Self { n_qubits, ops }
    }

    pub fn to_json(&self) -> Result<String> {
        let records: Vec<GateRecord> = self.ops.iter().map(GateRecord::from).collect();
        Ok(serde_json::to_string_pretty(&records)?)
    }

    /// Parses a JSON list of `{kind, params, targets, tag}` records. The qubit
    /// count is one past the largest target label.
    pub fn from_json(text: &str) -> Result<TaggedCircuit> {
        let records: Vec<GateRecord> = serde_json::from_str(text)?;
        let n = records
            .iter()
            .flat_map(|r| r.targets.iter())
            .map(|q| q.0 as usize + 1)
            .max()
            .unwrap_or(0);
        let mut c = TaggedCircuit::new(n);
        for r in records {
            let kind = GateKind::from_parts(&r.kind, &r.params)?;
            c.push_op(CircuitOp { gate: Gate { kind, targets: r.targets }, tag: r.tag, role: r.role })?;
        }
        Ok(c)
    }

    pub fn qubit_set(&self) -> BTreeSet<Qubit> {
        self.qubits().collect()
    }
}

/// Wire format for one circuit op.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateRecord {
    pub kind: String,
    #[serde(default)]
    pub params: Vec<f64>,
    pub targets: Vec<Qubit>,
    #[serde(default = "default_tag")]
    pub tag: Tag,
    #[serde(default, skip_serializing_if = "is_circuit_role")]
    pub role: OpRole,
}

fn default_tag() -> Tag {
    Tag::Public
}

fn is_circuit_role(r: &OpRole) -> bool {
    *r == OpRole::Circuit
}

impl From<&CircuitOp> for GateRecord {
    fn from(op: &CircuitOp) -> Self {
        GateRecord {
            kind: op.gate.kind.name().to_string(),
            params: op.gate.kind.angle().into_iter().collect(),
            targets: op.gate.targets.clone(),
            tag: op.tag,
            role: op.role,
        }
    }
}
