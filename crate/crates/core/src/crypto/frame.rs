use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::key::{apply_pad, remove_pad, PadKey};
use crate::error::{Error, Result};
use crate::sim::{Gate, GateKind, Qubit, StateVector};

/// How a gate acts on one of its qubits, for commutation checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Axis {
    Z,
    X,
}

fn axis(gate: &Gate, q: Qubit) -> Option<Axis> {
    let pos = gate.targets.iter().position(|&t| t == q)?;
    use GateKind::*;
    match gate.kind {
        I | Z | S | T | Rz(_) | Cz | Ccz | Rzz(_) => Some(Axis::Z),
        X | Rx(_) => Some(Axis::X),
        Cnot | Ccx if pos + 1 == gate.targets.len() => Some(Axis::X),
        Cnot | Ccx => Some(Axis::Z),
        H | Y | Ry(_) | Swap => None,
    }
}

/// Sufficient commutation test: on every shared qubit both gates must be
/// diagonal in the same single-qubit basis.
pub(crate) fn gates_commute(g: &Gate, h: &Gate) -> bool {
    g.targets.iter().filter(|q| h.targets.contains(q)).all(|&q| match (axis(g, q), axis(h, q)) {
        (Some(x), Some(y)) => x == y,
        _ => false,
    })
}

/// Client-side decryption ledger.
///
/// With `pauli` giving `P = prod X^a Z^b` and `pending = [g1, ..., gk]`, the
/// physical state is `g1 g2 ... gk P |psi>`: applying the pending gates in
/// list order and then `Z^b X^a` recovers the plaintext.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CorrectionFrame {
    pauli: BTreeMap<Qubit, PadKey>,
    pending: Vec<Gate>,
}

/// JSON form of a frame.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameSnapshot {
    pub pauli: BTreeMap<u32, PadKey>,
    pub pending: Vec<String>,
}

impl CorrectionFrame {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn key(&self, q: Qubit) -> Option<PadKey> {
        self.pauli.get(&q).copied()
    }

    pub fn is_encrypted(&self, q: Qubit) -> bool {
        self.pauli.contains_key(&q)
    }

    pub fn encrypted(&self) -> impl Iterator<Item = Qubit> + '_ {
        self.pauli.keys().copied()
    }

    pub fn pending(&self) -> &[Gate] {
        &self.pending
    }

    pub fn has_pending_on(&self, q: Qubit) -> bool {
        self.pending.iter().any(|g| g.touches(q))
    }

    fn key_mut(&mut self, q: Qubit) -> &mut PadKey {
        self.pauli.entry(q).or_default()
    }

    /// Installs `key` for a plaintext qubit that has just been padded.
    pub(crate) fn set_key(&mut self, q: Qubit, key: PadKey) -> Result<()> {
        if self.is_encrypted(q) || self.has_pending_on(q) {
            return Err(Error::ProtocolViolation(format!("{q} is already encrypted")));
        }
        self.pauli.insert(q, key);
        Ok(())
    }

    /// Drops the entry of a qubit that has been measured and decoded.
    pub(crate) fn forget(&mut self, q: Qubit) {
        self.pauli.remove(&q);
    }

    /// Updates the ledger for `gate` having been applied to the encrypted
    /// state, so it keeps describing the plaintext `gate |psi>`.
    pub fn conjugate(&mut self, gate: &Gate) -> Result<()> {
        use GateKind::*;
        match gate.kind {
            I => Ok(()),
            X | Y | Z => {
                self.conjugate_pauli(gate);
                Ok(())
            }
            Swap => {
                let (p, q) = (gate.targets[0], gate.targets[1]);
                let swap = |x: Qubit| if x == p { q } else if x == q { p } else { x };
                for g in &mut self.pending {
                    for t in &mut g.targets {
                        *t = swap(*t);
                    }
                }
                let kp = self.pauli.remove(&p);
                let kq = self.pauli.remove(&q);
                if let Some(k) = kp {
                    self.pauli.insert(q, k);
                }
                if let Some(k) = kq {
                    self.pauli.insert(p, k);
                }
                Ok(())
            }
            H | S | Cnot | Cz | Ccz | Ccx => {
                if let Some(g) = self.pending.iter().find(|g| !gates_commute(g, gate)) {
                    return Err(Error::UnsupportedConjugation(format!("{gate} does not commute with pending {g}")));
                }
                self.conjugate_clifford(gate);
                Ok(())
            }
            T | Rx(_) | Ry(_) | Rz(_) | Rzz(_) => {
                Err(Error::UnsupportedConjugation(format!("{gate} on an encrypted qubit")))
            }
        }
    }

    /// `G g1..gk P = g1..gk (Q P G) G` with `Q = (g1..gk)^dag G (g1..gk)`.
    fn conjugate_pauli(&mut self, gate: &Gate) {
        let q0 = gate.targets[0];
        let own = match gate.kind {
            GateKind::X => PadKey::new(1, 0),
            GateKind::Y => PadKey::new(1, 1),
            _ => PadKey::new(0, 1),
        };
        let mut q: BTreeMap<Qubit, PadKey> = [(q0, own)].into();
        for g in &self.pending {
            propagate_pauli(&mut q, g);
        }
        q.entry(q0).and_modify(|k| *k = k.xor(own)).or_insert(own);
        for (label, k) in q {
            if !k.is_zero() || self.pauli.contains_key(&label) {
                let e = self.key_mut(label);
                *e = e.xor(k);
            }
        }
    }

    fn conjugate_clifford(&mut self, gate: &Gate) {
        let t = &gate.targets;
        match gate.kind {
            GateKind::H => {
                let k = self.key_mut(t[0]);
                std::mem::swap(&mut k.a, &mut k.b);
            }
            GateKind::S => {
                let k = self.key_mut(t[0]);
                k.b ^= k.a;
            }
            GateKind::Cnot | GateKind::Cz => {
                let mut keys: BTreeMap<Qubit, PadKey> = t.iter().map(|&q| (q, self.key(q).unwrap_or_default())).collect();
                propagate_pauli(&mut keys, gate);
                self.pauli.extend(keys);
            }
            GateKind::Ccz => {
                let added = self.ccz_update(t[0], t[1], t[2]);
                self.pending.extend(added);
            }
            GateKind::Ccx => {
                let (c1, c2, tg) = (t[0], t[1], t[2]);
                // CCX = H_t CCZ H_t
                let k = self.key_mut(tg);
                std::mem::swap(&mut k.a, &mut k.b);
                let added = self.ccz_update(c1, c2, tg);
                let k = self.key_mut(tg);
                std::mem::swap(&mut k.a, &mut k.b);
                for g in added {
                    let g = if g.touches(tg) {
                        let other = if g.targets[0] == tg { g.targets[1] } else { g.targets[0] };
                        Gate::cnot(other, tg)
                    } else {
                        g
                    };
                    self.pending.push(g);
                }
            }
            _ => unreachable!("non-Clifford kinds are filtered by conjugate"),
        }
    }

    /// Pauli-part update for CCZ and the CZ corrections it generates:
    /// `CCZ X_i CCZ = X_i CZ_jk`.
    fn ccz_update(&mut self, q0: Qubit, q1: Qubit, q2: Qubit) -> Vec<Gate> {
        let qs = [q0, q1, q2];
        let a: Vec<u8> = qs.iter().map(|&q| self.key(q).unwrap_or_default().a).collect();
        let mut added = Vec::new();
        let mut db = [0u8; 3];
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            db[i] ^= a[j] & a[k];
            if a[i] == 1 {
                db[k] ^= a[j];
                db[j] ^= a[k];
                let (lo, hi) = if j < k { (j, k) } else { (k, j) };
                added.push(Gate::cz(qs[lo], qs[hi]));
            }
        }
        for i in 0..3 {
            let e = self.key_mut(qs[i]);
            e.b ^= db[i];
        }
        added
    }

    /// Index of the pending gate that must be resolved first before any of
    /// `qubits` is free of pending corrections, if any.
    pub fn next_blocking(&self, qubits: &[Qubit]) -> Option<usize> {
        let j = self.pending.iter().position(|g| qubits.iter().any(|&q| g.touches(q)))?;
        Some(self.resolution_root(j))
    }

    fn resolution_root(&self, j: usize) -> usize {
        match self.pending[..j].iter().position(|g| !gates_commute(g, &self.pending[j])) {
            Some(i) => self.resolution_root(i),
            None => j,
        }
    }

    /// Whether pending gate `idx` commutes with every gate ahead of it.
    pub fn resolvable(&self, idx: usize) -> bool {
        idx < self.pending.len() && self.resolution_root(idx) == idx
    }

    /// Index of the pending gate to resolve before `gate` can be conjugated
    /// through the frame, if any. Paulis and SWAP always pass.
    pub fn blocking_for_gate(&self, gate: &Gate) -> Option<usize> {
        if matches!(gate.kind, GateKind::I | GateKind::X | GateKind::Y | GateKind::Z | GateKind::Swap) {
            return None;
        }
        let j = self.pending.iter().position(|g| !gates_commute(g, gate))?;
        Some(self.resolution_root(j))
    }

    /// Removes pending gate `idx` from the ledger; the caller is responsible
    /// for applying it to the state.
    pub(crate) fn pop_pending(&mut self, idx: usize) -> Result<Gate> {
        if !self.resolvable(idx) {
            return Err(Error::CorrectionNotLocal(format!("pending correction {idx} is not at the front")));
        }
        Ok(self.pending.remove(idx))
    }

    /// Applies pending gate `idx` to the state and removes it from the frame.
    pub fn resolve_pending(&mut self, state: &mut StateVector, idx: usize) -> Result<Gate> {
        let g = self.pop_pending(idx)?;
        state.apply(&g)?;
        Ok(g)
    }

    /// Removes every pending correction touching `labels` (their qubits must
    /// all lie in `labels`), then the pads, returning those qubits to
    /// plaintext.
    pub fn decrypt(&mut self, state: &mut StateVector, labels: &[Qubit]) -> Result<()> {
        let set: BTreeSet<Qubit> = labels.iter().copied().collect();
        for g in &self.pending {
            if g.targets.iter().any(|q| set.contains(q)) && !g.targets.iter().all(|q| set.contains(q)) {
                return Err(Error::CorrectionNotLocal(g.to_string()));
            }
        }
        while let Some(idx) = self.next_blocking(labels) {
            let root = &self.pending[idx];
            if !root.targets.iter().all(|q| set.contains(q)) {
                return Err(Error::CorrectionNotLocal(root.to_string()));
            }
            self.resolve_pending(state, idx)?;
        }
        for &q in labels {
            if let Some(k) = self.pauli.remove(&q) {
                remove_pad(state, q, k)?;
            }
        }
        Ok(())
    }

    /// Plaintext bit for a Z-basis outcome of encrypted qubit `q`.
    pub fn decrypt_measurement(&self, q: Qubit, outcome: u8) -> Result<u8> {
        if let Some(g) = self.pending.iter().find(|g| g.touches(q)) {
            return Err(Error::CorrectionNotLocal(g.to_string()));
        }
        Ok(decrypt_measurement(outcome, self.key(q).unwrap_or_default()))
    }

    pub fn snapshot(&self) -> FrameSnapshot {
        FrameSnapshot {
            pauli: self.pauli.iter().map(|(q, k)| (q.0, *k)).collect(),
            pending: self.pending.iter().map(|g| g.to_string()).collect(),
        }
    }
}

/// Conjugates a Pauli (as X/Z exponents per qubit) by a CNOT or CZ.
fn propagate_pauli(p: &mut BTreeMap<Qubit, PadKey>, g: &Gate) {
    let (x, y) = (g.targets[0], g.targets[1]);
    let kx = p.get(&x).copied().unwrap_or_default();
    let ky = p.get(&y).copied().unwrap_or_default();
    let (nx, ny) = match g.kind {
        GateKind::Cnot => (PadKey { a: kx.a, b: kx.b ^ ky.b }, PadKey { a: ky.a ^ kx.a, b: ky.b }),
        GateKind::Cz => (PadKey { a: kx.a, b: kx.b ^ ky.a }, PadKey { a: ky.a, b: ky.b ^ kx.a }),
        _ => unreachable!("pending corrections are CZ or CNOT"),
    };
    p.insert(x, nx);
    p.insert(y, ny);
}

/// Pads plaintext qubit `label` with `key` and records it in the frame.
pub fn encrypt(state: &mut StateVector, frame: &mut CorrectionFrame, label: Qubit, key: PadKey) -> Result<()> {
    apply_pad(state, label, key)?;
    frame.set_key(label, key)
}

/// Functional form of [`CorrectionFrame::conjugate`].
pub fn conjugate_frame(frame: &CorrectionFrame, gate: &Gate) -> Result<CorrectionFrame> {
    let mut f = frame.clone();
    f.conjugate(gate)?;
    Ok(f)
}

/// Functional form of [`CorrectionFrame::decrypt`].
pub fn decrypt(state: &mut StateVector, labels: &[Qubit], frame: &mut CorrectionFrame) -> Result<()> {
    frame.decrypt(state, labels)
}

/// A Z-basis outcome of `X^a Z^b |psi>` is the plaintext outcome flipped by `a`.
pub fn decrypt_measurement(outcome: u8, key: PadKey) -> u8 {
    (outcome ^ key.a) & 1
}
