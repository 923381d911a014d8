use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::sim::GateKind;

/// Single-qubit gate families a client device may support.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum SingleQubitKind {
    H,
    X,
    Y,
    Z,
    S,
    T,
    Rx,
    Ry,
    Rz,
}

impl SingleQubitKind {
    pub const ALL: [SingleQubitKind; 9] = [
        SingleQubitKind::H,
        SingleQubitKind::X,
        SingleQubitKind::Y,
        SingleQubitKind::Z,
        SingleQubitKind::S,
        SingleQubitKind::T,
        SingleQubitKind::Rx,
        SingleQubitKind::Ry,
        SingleQubitKind::Rz,
    ];

    /// Family of a one-qubit gate kind; `None` for multi-qubit kinds and the
    /// identity marker.
    pub fn of(kind: &GateKind) -> Option<SingleQubitKind> {
        Some(match kind {
            GateKind::H => SingleQubitKind::H,
            GateKind::X => SingleQubitKind::X,
            GateKind::Y => SingleQubitKind::Y,
            GateKind::Z => SingleQubitKind::Z,
            GateKind::S => SingleQubitKind::S,
            GateKind::T => SingleQubitKind::T,
            GateKind::Rx(_) => SingleQubitKind::Rx,
            GateKind::Ry(_) => SingleQubitKind::Ry,
            GateKind::Rz(_) => SingleQubitKind::Rz,
            _ => return None,
        })
    }
}

/// Quantum resources of the client device.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CapabilityProfile {
    pub max_client_qubits: usize,
    pub multiqubit_allowed: bool,
    pub allowed_single_qubit_gates: BTreeSet<SingleQubitKind>,
    pub can_measure: bool,
    pub can_swap_ports: bool,
}

impl CapabilityProfile {
    /// An `m`-qubit computer that can run any gate on the qubits it holds.
    pub fn full(m: usize) -> Self {
        Self {
            max_client_qubits: m,
            multiqubit_allowed: true,
            allowed_single_qubit_gates: SingleQubitKind::ALL.into_iter().collect(),
            can_measure: true,
            can_swap_ports: m >= 2,
        }
    }

    /// `m` independent one-qubit computers.
    pub fn one_qubit_computers(m: usize) -> Self {
        Self { multiqubit_allowed: false, ..Self::full(m) }
    }

    /// No quantum resources at all.
    pub fn zero_qubit() -> Self {
        Self {
            max_client_qubits: 0,
            multiqubit_allowed: false,
            allowed_single_qubit_gates: BTreeSet::new(),
            can_measure: false,
            can_swap_ports: false,
        }
    }

    /// Whether the client may apply `kind` to qubits it holds. Capabilities
    /// are irrelevant for a zero-qubit client.
    pub fn permits(&self, kind: &GateKind) -> bool {
        if self.max_client_qubits == 0 {
            return false;
        }
        match kind {
            GateKind::I => true,
            k if k.arity() > 1 => self.multiqubit_allowed && k.arity() <= self.max_client_qubits,
            k => SingleQubitKind::of(k).is_some_and(|f| self.allowed_single_qubit_gates.contains(&f)),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permits_by_capability() {
        let full = CapabilityProfile::full(2);
        assert!(full.permits(&GateKind::Cnot));
        assert!(!full.permits(&GateKind::Ccz));
        let single = CapabilityProfile::one_qubit_computers(2);
        assert!(!single.permits(&GateKind::Cnot));
        assert!(single.permits(&GateKind::Rz(0.1)));
        let mut xz = single.clone();
        xz.allowed_single_qubit_gates = [SingleQubitKind::X, SingleQubitKind::Z].into_iter().collect();
        assert!(!xz.permits(&GateKind::Rz(0.1)));
        assert!(!CapabilityProfile::zero_qubit().permits(&GateKind::X));
    }

    #[test]
    fn profile_json_roundtrip() {
        let p = CapabilityProfile::one_qubit_computers(3);
        let text = p.to_json().unwrap();
        assert!(text.contains("\"RZ\""));
        assert_eq!(CapabilityProfile::from_json(&text).unwrap(), p);
    }
}
