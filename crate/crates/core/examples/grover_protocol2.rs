//! Three-qubit Grover search delegated with a two-qubit client that can run
//! any gate but holds at most two qubits at a time.

use std::collections::BTreeMap;

use pdqc::circuit::scenarios;
use pdqc::circuit::CapabilityProfile;
use pdqc::protocol::{run_protocol2, ProtocolOptions};
use pdqc::rng::Streams;

fn main() -> pdqc::Result<()> {
    let circuit = scenarios::grover3();
    let profile = CapabilityProfile::full(2);
    let mut counts = BTreeMap::new();
    let mut last = None;
    for shot in 0..1000 {
        let run = run_protocol2(&circuit, &profile, &ProtocolOptions::measured(), Streams::new(shot))?;
        *counts.entry(run.bitstring()).or_insert(0) += 1;
        last = Some(run);
    }
    println!("outcomes over 1000 shots: {counts:?}");
    let s = &last.unwrap().summary;
    println!(
        "per shot: {} sends, {} rounds, {} server instructions, at most {} qubits held",
        s.sends, s.rounds, s.server_instructions, s.max_client_holdings
    );
    Ok(())
}
