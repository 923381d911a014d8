use std::collections::BTreeSet;

use super::profile::CapabilityProfile;
use super::tagged::{Dag, OpRole, TaggedCircuit};
use crate::sim::Qubit;

/// Maximal run of ops executable in sequence given `completed`, in circuit
/// index order, where `eligible` decides whether an op may be taken at all.
///
/// Repeatedly takes the lowest-index op whose predecessors are all completed
/// or already taken, until nothing more qualifies.
pub fn frontier_by(
    circuit: &TaggedCircuit,
    dag: &Dag,
    completed: &dyn Fn(usize) -> bool,
    eligible: &mut dyn FnMut(usize) -> bool,
) -> Vec<usize> {
    let n = circuit.len();
    let mut taken = vec![false; n];
    let mut out = Vec::new();
    loop {
        let next = (0..n).find(|&i| {
            !completed(i)
                && !taken[i]
                && dag.preds[i].iter().all(|&p| completed(p) || taken[p])
                && eligible(i)
        });
        match next {
            Some(i) => {
                taken[i] = true;
                out.push(i);
            }
            None => return out,
        }
    }
}

/// Gates the client can run now: predecessors done, every target held, and
/// the kind permitted by the profile. Trap halves are server work and are
/// never returned.
pub fn ready_frontier(
    circuit: &TaggedCircuit,
    completed: &BTreeSet<usize>,
    held: &BTreeSet<Qubit>,
    profile: &CapabilityProfile,
) -> Vec<usize> {
    let dag = circuit.dag();
    let ops = circuit.ops();
    frontier_by(circuit, &dag, &|i| completed.contains(&i), &mut |i| {
        let op = &ops[i];
        !matches!(op.role, OpRole::Trap { .. })
            && op.gate.targets.iter().all(|q| held.contains(q))
            && profile.permits(&op.gate.kind)
    })
}
