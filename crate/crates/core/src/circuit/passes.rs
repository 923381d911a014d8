use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tagged::{CircuitOp, OpRole, Tag, TaggedCircuit};
use crate::error::{Error, Result};
use crate::sim::{Gate, GateKind, Qubit};

/// Replaces every `RZZ(theta)` by `CNOT . RZ(theta) on the target . CNOT`.
///
/// The CNOT skeleton carries no angle and is public (unless the original gate
/// hid its structure); the isolated `RZ` keeps the confidential angle.
pub fn decompose_rzz(circuit: &TaggedCircuit) -> TaggedCircuit {
    let mut ops = Vec::with_capacity(circuit.len());
    for op in circuit.ops() {
        let GateKind::Rzz(theta) = op.gate.kind else {
            ops.push(op.clone());
            continue;
        };
        let (a, b) = (op.gate.targets[0], op.gate.targets[1]);
        let (skeleton, angle) = match op.tag {
            Tag::PrivateStructure => (Tag::PrivateStructure, Tag::PrivateStructure),
            _ => (Tag::Public, Tag::PrivateAngle),
        };
        ops.push(CircuitOp { gate: Gate::cnot(a, b), tag: skeleton, role: op.role });
        ops.push(CircuitOp { gate: Gate::rz(theta, b), tag: angle, role: op.role });
        ops.push(CircuitOp { gate: Gate::cnot(a, b), tag: skeleton, role: op.role });
    }
    TaggedCircuit::from_parts(circuit.n_qubits(), ops)
}

/// Splits `theta` into `n` shares summing to `theta` modulo 2π; the first
/// `n - 1` shares are uniform on `[0, 2π)`.
pub fn split_angle(theta: f64, n: usize, rng: &mut impl Rng) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::BadArgument("cannot split an angle into zero shares".into()));
    }
    if !theta.is_finite() {
        return Err(Error::BadArgument("angle is not finite".into()));
    }
    let mut shares: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.0..TAU)).collect();
    if n == 1 {
        shares.push(theta);
    } else {
        let used: f64 = shares.iter().sum();
        shares.push((theta - used).rem_euclid(TAU));
    }
    Ok(shares)
}

/// Expands each private-angle rotation into `n` consecutive rotations whose
/// angles are shares of the original.
pub fn split_private_angles(circuit: &TaggedCircuit, n: usize, rng: &mut impl Rng) -> Result<TaggedCircuit> {
    let mut ops = Vec::new();
    for op in circuit.ops() {
        match (op.tag, op.gate.kind) {
            (Tag::PrivateAngle, k @ (GateKind::Rx(t) | GateKind::Ry(t) | GateKind::Rz(t))) => {
                for share in split_angle(t, n, rng)? {
                    ops.push(CircuitOp { gate: Gate { kind: k.with_angle(share), ..op.gate.clone() }, ..op.clone() });
                }
            }
            _ => ops.push(op.clone()),
        }
    }
    Ok(TaggedCircuit::from_parts(circuit.n_qubits(), ops))
}

/// Positions of one inserted trap pair in the rewritten circuit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrapPair {
    /// Index (in the input circuit) of the server gate the pair follows.
    pub after: usize,
    pub first: usize,
    pub request: usize,
    pub second: usize,
    pub kind: String,
    pub qubits: [Qubit; 2],
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrapPlan {
    pub pairs: Vec<TrapPair>,
}

impl TrapPlan {
    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// Inserts self-cancelling CNOT/CZ pairs after multi-qubit gates, each with
/// probability `density`, and places a client request on one of the pair's
/// qubits between the two halves so the server cannot cancel them.
pub fn insert_traps(circuit: &TaggedCircuit, density: f64, rng: &mut impl Rng) -> Result<(TaggedCircuit, TrapPlan)> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::BadArgument(format!("trap density {density} outside [0, 1]")));
    }
    let mut ops = Vec::with_capacity(circuit.len());
    let mut plan = TrapPlan::default();
    for (i, op) in circuit.ops().iter().enumerate() {
        ops.push(op.clone());
        if op.gate.arity() < 2 || op.role != OpRole::Circuit || density == 0.0 || !rng.gen_bool(density) {
            continue;
        }
        let mut qs = op.gate.targets.clone();
        qs.shuffle(rng);
        let (a, b) = (qs[0], qs[1]);
        let gate = if rng.gen_bool(0.5) { Gate::cnot(a, b) } else { Gate::cz(a, b) };
        let probe = if rng.gen_bool(0.5) { a } else { b };
        let pair = plan.pairs.len();
        let first = ops.len();
        ops.push(CircuitOp { gate: gate.clone(), tag: Tag::Public, role: OpRole::Trap { pair } });
        ops.push(CircuitOp {
            gate: Gate { kind: GateKind::I, targets: vec![probe] },
            tag: Tag::PrivateStructure,
            role: OpRole::Request { pair },
        });
        ops.push(CircuitOp { gate: gate.clone(), tag: Tag::Public, role: OpRole::Trap { pair } });
        plan.pairs.push(TrapPair {
            after: i,
            first,
            request: first + 1,
            second: first + 2,
            kind: gate.kind.name().to_string(),
            qubits: [a, b],
        });
    }
    Ok((TaggedCircuit::from_parts(circuit.n_qubits(), ops), plan))
}

/// A bijection on a finite label set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Permutation<T: Ord> {
    map: BTreeMap<T, T>,
}

impl<T: Ord + Copy> Permutation<T> {
    pub fn identity(labels: impl IntoIterator<Item = T>) -> Self {
        Self { map: labels.into_iter().map(|l| (l, l)).collect() }
    }

    pub fn apply(&self, x: T) -> T {
        self.map.get(&x).copied().unwrap_or(x)
    }

    pub fn inverse(&self) -> Self {
        Self { map: self.map.iter().map(|(&k, &v)| (v, k)).collect() }
    }

    /// `self` after `first`.
    pub fn after(&self, first: &Permutation<T>) -> Self {
        let mut domain: Vec<T> = first.map.keys().chain(self.map.keys()).copied().collect();
        domain.sort();
        domain.dedup();
        Self { map: domain.into_iter().map(|x| (x, self.apply(first.apply(x)))).collect() }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(k, v)| k == v)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (T, T)> + '_ {
        self.map.iter().map(|(&k, &v)| (k, v))
    }
}

/// Uniformly random relabeling of `held`; the identity is a valid outcome.
pub fn plan_swap_shuffle<T: Ord + Copy>(held: &[T], rng: &mut impl Rng) -> Result<Permutation<T>> {
    if held.is_empty() {
        return Err(Error::BadArgument("no labels to shuffle".into()));
    }
    let mut image = held.to_vec();
    image.shuffle(rng);
    Ok(Permutation { map: held.iter().copied().zip(image).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::scenarios;
    use crate::oracle;
    use crate::rng::Streams;
    use crate::sim::{circuit_unitary, StateVector};
    use std::f64::consts::PI;

    #[test]
    fn rzz_decomposition_matches_native_dense() {
        for theta in [0.0, 0.3, 1.7, PI] {
            let c = TaggedCircuit::new(2).with(Gate::rzz(theta, 0, 1), Tag::PrivateAngle).unwrap();
            let d = decompose_rzz(&c);
            let kinds: Vec<_> = d.ops().iter().map(|o| (o.gate.kind.name(), o.tag)).collect();
            assert_eq!(kinds, vec![("CNOT", Tag::Public), ("RZ", Tag::PrivateAngle), ("CNOT", Tag::Public)]);
            assert_eq!(d.ops()[1].gate.targets, vec![Qubit(1)]);
            let native = oracle::circuit_dense(2, c.gates());
            let decomposed = oracle::circuit_dense(2, d.gates());
            assert!(oracle::equal_up_to_phase(&native, &decomposed, 1e-12), "theta={theta}");
            if theta == 0.0 {
                assert!(oracle::equal_up_to_phase(&decomposed, &oracle::identity(2), 1e-12));
            }
        }
    }

    #[test]
    fn rzz_free_circuit_unchanged() {
        let c = scenarios::grover3();
        assert_eq!(decompose_rzz(&c), c);
    }

    #[test]
    fn split_angle_cases() {
        let mut rng = Streams::new(1).stream(0);
        assert_eq!(split_angle(0.7, 1, &mut rng).unwrap(), vec![0.7]);
        assert!(matches!(split_angle(0.7, 0, &mut rng), Err(Error::BadArgument(_))));
        for n in 2..6 {
            let shares = split_angle(1.0, n, &mut rng).unwrap();
            assert_eq!(shares.len(), n);
            assert!(shares[..n - 1].iter().all(|s| (0.0..TAU).contains(s)));
            let diff = (shares.iter().sum::<f64>() - 1.0).rem_euclid(TAU);
            assert!(diff < 1e-12 || TAU - diff < 1e-12);
        }
    }

    #[test]
    fn split_rz_composes_to_original() {
        let mut rng = Streams::new(2).stream(0);
        for theta in [0.4, 2.5, -1.1] {
            let shares = split_angle(theta, 2, &mut rng).unwrap();
            let whole = oracle::circuit_dense(1, [&Gate::rz(theta, 0)]);
            let parts = oracle::circuit_dense(1, [&Gate::rz(shares[0], 0), &Gate::rz(shares[1], 0)]);
            assert!(oracle::equal_up_to_phase(&whole, &parts, 1e-12));
        }
    }

    #[test]
    fn traps_at_zero_density_do_nothing() {
        let c = scenarios::grover3();
        let mut rng = Streams::new(3).stream(0);
        let (t, plan) = insert_traps(&c, 0.0, &mut rng).unwrap();
        assert_eq!(t, c);
        assert!(plan.is_empty());
        assert!(insert_traps(&c, 1.5, &mut rng).is_err());
    }

    #[test]
    fn traps_preserve_grover_state() {
        let c = scenarios::grover3();
        for seed in 0..10 {
            let mut rng = Streams::new(seed).stream(0);
            let (t, plan) = insert_traps(&c, 0.5, &mut rng).unwrap();
            let mut a = StateVector::with_qubits(3);
            a.apply_all(c.gates()).unwrap();
            let mut b = StateVector::with_qubits(3);
            b.apply_all(t.gates()).unwrap();
            assert!((a.fidelity(&b).unwrap() - 1.0).abs() < 1e-10);
            for p in &plan.pairs {
                let ops = t.ops();
                assert!(matches!(ops[p.first].role, OpRole::Trap { .. }));
                assert!(matches!(ops[p.request].role, OpRole::Request { .. }));
                let pair = [&ops[p.first].gate, &ops[p.second].gate];
                let u = oracle::circuit_dense(3, pair);
                assert!(oracle::equal_up_to_phase(&u, &oracle::identity(3), 1e-12));
            }
        }
    }

    #[test]
    fn trapped_unitary_matches_original() {
        let c = decompose_rzz(&scenarios::qaoa3(&scenarios::QaoaAngles::default()));
        let mut rng = Streams::new(9).stream(0);
        let (t, plan) = insert_traps(&c, 1.0, &mut rng).unwrap();
        assert!(!plan.is_empty());
        let labels: Vec<Qubit> = c.qubits().collect();
        let u = circuit_unitary(&labels, c.gates()).unwrap();
        let v = circuit_unitary(&labels, t.gates()).unwrap();
        assert!(oracle::equal_up_to_phase(&u, &v, 1e-10));
    }

    #[test]
    fn shuffle_cases() {
        let mut rng = Streams::new(4).stream(0);
        assert!(plan_swap_shuffle(&[Qubit(3)], &mut rng).unwrap().is_identity());
        assert!(plan_swap_shuffle::<Qubit>(&[], &mut rng).is_err());
        let p = plan_swap_shuffle(&[1u32, 2, 3, 4, 5], &mut rng).unwrap();
        assert!(p.after(&p.inverse()).is_identity());
        assert!(p.inverse().after(&p).is_identity());
    }

    #[test]
    fn two_label_shuffle_is_fair() {
        let streams = Streams::new(77);
        let swaps = (0..10_000)
            .filter(|&i| !plan_swap_shuffle(&[0u32, 1], &mut streams.child(i).stream(0)).unwrap().is_identity())
            .count();
        let f = swaps as f64 / 10_000.0;
        assert!((0.48..=0.52).contains(&f), "swap frequency {f}");
    }
}
