//! QAOA on three qubits with a client that holds one qubit and can only run
//! single-qubit gates. Every entangling gate goes to the server, private
//! angles stay home, and trap pairs pad out the instruction stream.

use pdqc::circuit::scenarios::{self, QaoaAngles};
use pdqc::circuit::CapabilityProfile;
use pdqc::protocol::{run_protocol3, Actor, ProtocolOptions};
use pdqc::rng::Streams;
use pdqc::runner::reference_state;
use pdqc::sim::fidelity_up_to_global_phase;

fn main() -> pdqc::Result<()> {
    let circuit = scenarios::qaoa3(&QaoaAngles::default());
    let profile = CapabilityProfile::one_qubit_computers(1);
    let opts = ProtocolOptions { trap_density: 0.5, ..Default::default() };
    let run = run_protocol3(&circuit, &profile, &opts, Streams::new(5))?;

    let f = fidelity_up_to_global_phase(run.final_state.as_ref().unwrap(), &reference_state(&circuit)?)?;
    println!("fidelity {f:.12}, {} trap pairs", run.trap_plan.pairs.len());
    for (op, by) in run.circuit.ops().iter().zip(&run.executed_by) {
        let who = match by {
            Some(Actor::Client) => "client",
            Some(Actor::Server(_)) => "server",
            _ => "-",
        };
        println!("  {who:<6} {} ({:?})", op.gate, op.tag);
    }
    Ok(())
}
