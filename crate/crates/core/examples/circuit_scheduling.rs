//! What a two-qubit client can run next, computed from the circuit DAG as
//! it cycles through pairs of qubits.

use std::collections::BTreeSet;

use pdqc::circuit::{ready_frontier, scenarios, CapabilityProfile};
use pdqc::sim::Qubit;

fn main() {
    let circuit = scenarios::qaoa3(&Default::default());
    let profile = CapabilityProfile::full(2);
    let mut completed = BTreeSet::new();
    let pairs = [[0u32, 1], [0, 2], [1, 2]];
    let mut idle = 0;
    for round in 0.. {
        if completed.len() == circuit.len() || idle == pairs.len() {
            break;
        }
        let held: BTreeSet<Qubit> = pairs[round % pairs.len()].into_iter().map(Qubit).collect();
        let ready = ready_frontier(&circuit, &completed, &held, &profile);
        idle = if ready.is_empty() { idle + 1 } else { 0 };
        let names: Vec<String> = ready.iter().map(|&i| circuit.ops()[i].gate.to_string()).collect();
        println!("round {round}, holding {held:?}: {}", names.join(" "));
        completed.extend(ready);
    }
    println!("{} of {} gates done", completed.len(), circuit.len());
}
