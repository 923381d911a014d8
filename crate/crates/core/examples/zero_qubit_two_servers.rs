//! A client with no quantum hardware at all. Two non-communicating servers
//! pass the qubits through a common node; each private rotation is split
//! into two angle shares, one per server.

use pdqc::circuit::scenarios;
use pdqc::circuit::CapabilityProfile;
use pdqc::protocol::{run_protocol4, ProtocolOptions};
use pdqc::rng::Streams;
use pdqc::runner::reference_state;
use pdqc::sim::fidelity_up_to_global_phase;

fn main() -> pdqc::Result<()> {
    let circuit = scenarios::qaoa3(&Default::default());
    let run = run_protocol4(&circuit, &CapabilityProfile::zero_qubit(), &ProtocolOptions::default(), Streams::new(3))?;
    let f = fidelity_up_to_global_phase(run.final_state.as_ref().unwrap(), &reference_state(&circuit)?)?;
    println!("fidelity {f:.12}");
    println!("private angles: {:.4?}", circuit.private_angles());
    for r in &run.shares {
        println!(
            "  op {:>2}: server{} gets {:.4}, server{} gets {:.4}",
            r.op, r.first_server, r.first_share, r.second_server, r.second_share
        );
    }
    for s in [1, 2] {
        let v = run.server_view(s);
        println!("server{s}: {} messages, {} instructions", v.events.len(), v.instructions().count());
    }
    Ok(())
}
