//! Built-in example circuits: three-qubit Grover search, a one-layer QAOA
//! ansatz and a small quantum neural network, plus a random circuit generator
//! used by the property tests.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tagged::{Tag, TaggedCircuit};
use crate::sim::Gate;

fn push(c: &mut TaggedCircuit, gate: Gate, tag: Tag) {
    c.push(gate, tag).expect("scenario gates are well formed");
}

/// One Grover iteration on three qubits marking `|101>` and `|110>`
/// (bitstrings read q0 first).
///
/// The oracle is `X1 CCZ X1 . X2 CCZ X2`; the diffusion is the usual
/// `H X CCZ X H` sandwich. The oracle's X gates reveal which states are
/// marked, so they are tagged as private structure.
pub fn grover3() -> TaggedCircuit {
    grover3_with_oracle(1, 2)
}

/// Grover iteration whose oracle flips qubit `flip_a`, then `flip_b`, around each
/// CCZ; used to compare oracles with identical gate counts.
pub fn grover3_with_oracle(flip_a: u32, flip_b: u32) -> TaggedCircuit {
    let mut c = TaggedCircuit::new(3);
    for q in 0..3 {
        push(&mut c, Gate::h(q), Tag::Public);
    }
    for marked in [flip_a, flip_b] {
        push(&mut c, Gate::x(marked), Tag::PrivateStructure);
        push(&mut c, Gate::ccz(0, 1, 2), Tag::Public);
        push(&mut c, Gate::x(marked), Tag::PrivateStructure);
    }
    diffusion3(&mut c);
    c
}

fn diffusion3(c: &mut TaggedCircuit) {
    for q in 0..3 {
        push(c, Gate::h(q), Tag::Public);
    }
    for q in 0..3 {
        push(c, Gate::x(q), Tag::Public);
    }
    push(c, Gate::ccz(0, 1, 2), Tag::Public);
    for q in 0..3 {
        push(c, Gate::x(q), Tag::Public);
    }
    for q in 0..3 {
        push(c, Gate::h(q), Tag::Public);
    }
}

/// Cost angles `theta[0..3]` (single-qubit RZ), `theta[3..6]` (RZZ on
/// q0q1, q0q2, q1q2) and mixer angles `phi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QaoaAngles {
    pub theta: [f64; 6],
    pub phi: [f64; 3],
}

impl Default for QaoaAngles {
    fn default() -> Self {
        Self { theta: [0.37, 1.21, 2.03, 0.58, 1.44, 2.71], phi: [0.83, 1.97, 0.29] }
    }
}

impl QaoaAngles {
    pub fn random(rng: &mut impl Rng) -> Self {
        Self {
            theta: std::array::from_fn(|_| rng.gen_range(0.0..TAU)),
            phi: std::array::from_fn(|_| rng.gen_range(0.0..TAU)),
        }
    }
}

pub fn qaoa3(angles: &QaoaAngles) -> TaggedCircuit {
    let t = angles.theta;
    let mut c = TaggedCircuit::new(3);
    for q in 0..3 {
        push(&mut c, Gate::h(q), Tag::Public);
    }
    for q in 0..3 {
        push(&mut c, Gate::rz(t[q as usize], q), Tag::PrivateAngle);
    }
    push(&mut c, Gate::rzz(t[3], 0, 1), Tag::PrivateAngle);
    push(&mut c, Gate::rzz(t[4], 0, 2), Tag::PrivateAngle);
    push(&mut c, Gate::rzz(t[5], 1, 2), Tag::PrivateAngle);
    for q in 0..3 {
        push(&mut c, Gate::rx(angles.phi[q as usize], q), Tag::PrivateAngle);
    }
    c
}

/// Data encoding angles `x` and trainable weights `w`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QnnParams {
    pub x: [f64; 3],
    pub w: [f64; 6],
}

impl Default for QnnParams {
    fn default() -> Self {
        Self { x: [0.42, 1.13, 2.27], w: [0.91, 1.62, 0.18, 2.44, 1.05, 2.86] }
    }
}

impl QnnParams {
    pub fn random(rng: &mut impl Rng) -> Self {
        Self {
            x: std::array::from_fn(|_| rng.gen_range(0.0..TAU)),
            w: std::array::from_fn(|_| rng.gen_range(0.0..TAU)),
        }
    }
}

pub fn qnn3(p: &QnnParams) -> TaggedCircuit {
    let (x, w) = (p.x, p.w);
    let pa = Tag::PrivateAngle;
    let mut c = TaggedCircuit::new(3);
    push(&mut c, Gate::rx(x[0], 0), pa);
    push(&mut c, Gate::ry(w[0], 0), pa);
    push(&mut c, Gate::rx(x[1], 1), pa);
    push(&mut c, Gate::ry(w[1], 1), pa);
    push(&mut c, Gate::cnot(0, 1), Tag::Public);
    push(&mut c, Gate::rx(x[2], 2), pa);
    push(&mut c, Gate::ry(w[2], 2), pa);
    push(&mut c, Gate::ry(w[3], 0), pa);
    push(&mut c, Gate::cnot(1, 2), Tag::Public);
    push(&mut c, Gate::ry(w[4], 1), pa);
    push(&mut c, Gate::ry(w[5], 2), pa);
    push(&mut c, Gate::cnot(0, 1), Tag::Public);
    push(&mut c, Gate::cnot(1, 2), Tag::Public);
    c
}

/// Which gate families a random circuit may draw from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RandomVocabulary {
    pub toffoli: bool,
    pub rzz: bool,
}

impl Default for RandomVocabulary {
    fn default() -> Self {
        Self { toffoli: true, rzz: true }
    }
}

/// Random circuit on `n` qubits with `len` gates. Rotations are tagged
/// `PrivateAngle`; Pauli gates are occasionally `PrivateStructure`.
pub fn random_circuit(n: usize, len: usize, vocab: RandomVocabulary, rng: &mut impl Rng) -> TaggedCircuit {
    assert!(n >= 1);
    let mut c = TaggedCircuit::new(n);
    let pick = |k: usize, rng: &mut dyn rand::RngCore| -> Vec<u32> {
        rand::seq::index::sample(rng, n, k).into_iter().map(|q| q as u32).collect()
    };
    while c.len() < len {
        let choice = rng.gen_range(0..15);
        let angle = rng.gen_range(0.0..TAU);
        let (gate, tag) = match choice {
            0 => (Gate::h(pick(1, rng)[0]), Tag::Public),
            1 | 2 => {
                let tag = if rng.gen_bool(0.3) { Tag::PrivateStructure } else { Tag::Public };
                (Gate::x(pick(1, rng)[0]), tag)
            }
            3 => (Gate::new(crate::sim::GateKind::S, pick(1, rng)).unwrap(), Tag::Public),
            4 => (Gate::new(crate::sim::GateKind::T, pick(1, rng)).unwrap(), Tag::Public),
            5 => (Gate::z(pick(1, rng)[0]), Tag::Public),
            6 => (Gate::rx(angle, pick(1, rng)[0]), Tag::PrivateAngle),
            7 => (Gate::ry(angle, pick(1, rng)[0]), Tag::PrivateAngle),
            8 => (Gate::rz(angle, pick(1, rng)[0]), Tag::PrivateAngle),
            9 | 10 if n >= 2 => {
                let q = pick(2, rng);
                (Gate::cnot(q[0], q[1]), Tag::Public)
            }
            11 if n >= 2 => {
                let q = pick(2, rng);
                (Gate::cz(q[0], q[1]), Tag::Public)
            }
            12 if n >= 2 && vocab.rzz => {
                let q = pick(2, rng);
                (Gate::rzz(angle, q[0], q[1]), Tag::PrivateAngle)
            }
            13 if n >= 2 => {
                let q = pick(2, rng);
                (Gate::swap(q[0], q[1]), Tag::Public)
            }
            14 if n >= 3 && vocab.toffoli => {
                let q = pick(3, rng);
                if rng.gen_bool(0.5) {
                    (Gate::ccz(q[0], q[1], q[2]), Tag::Public)
                } else {
                    (Gate::ccx(q[0], q[1], q[2]), Tag::Public)
                }
            }
            _ => continue,
        };
        push(&mut c, gate, tag);
    }
    c
}
