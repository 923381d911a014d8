//! A server that measures every qubit it is sent. With the pad in place its
//! outcomes are independent of the client's data.

use pdqc::adversary::ServerBehavior;
use pdqc::circuit::{CapabilityProfile, Tag, TaggedCircuit};
use pdqc::protocol::{run_protocol2, ProtocolOptions};
use pdqc::rng::Streams;
use pdqc::sim::Gate;
use pdqc::stats::mutual_information;
use rand::Rng;

fn main() -> pdqc::Result<()> {
    let opts = ProtocolOptions { behavior: ServerBehavior::MeasureAndResend { probes: vec![0] }, ..Default::default() };
    let mut rng = Streams::new(2).stream(0);
    let mut pairs = Vec::new();
    for shot in 0..5000 {
        let secret: u8 = rng.gen_range(0..2);
        let mut c = TaggedCircuit::new(2);
        if secret == 1 {
            c.push(Gate::x(0), Tag::PrivateStructure)?;
        }
        c.push(Gate::cnot(0, 1), Tag::Public)?;
        let run = run_protocol2(&c, &CapabilityProfile::full(1), &opts, Streams::new(shot))?;
        pairs.push((secret, run.adversary.probes[0].outcome));
    }
    let ones = pairs.iter().filter(|p| p.1 == 1).count();
    println!("server saw 1 in {ones} of {} shots", pairs.len());
    println!("mutual information with the secret bit: {:.2e} bits", mutual_information(&pairs));
    Ok(())
}
