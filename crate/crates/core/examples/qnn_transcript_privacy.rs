//! Two QNN evaluations with different inputs and weights, run with the same
//! seed. The server's view of both is byte-for-byte the same.

use pdqc::circuit::scenarios::{self, QnnParams};
use pdqc::circuit::CapabilityProfile;
use pdqc::protocol::{run_protocol3, ProtocolOptions};
use pdqc::rng::Streams;

fn main() -> pdqc::Result<()> {
    let mut rng = Streams::new(8).stream(0);
    let profile = CapabilityProfile::one_qubit_computers(2);
    let mut views = Vec::new();
    for _ in 0..2 {
        let params = QnnParams::random(&mut rng);
        println!("x = {:.3?}  w = {:.3?}", params.x, params.w);
        let run = run_protocol3(&scenarios::qnn3(&params), &profile, &ProtocolOptions::default(), Streams::new(42))?;
        views.push(run.server_view(1).to_json()?);
    }
    println!("server view: {} bytes, identical: {}", views[0].len(), views[0] == views[1]);
    println!("{}", &views[0][..views[0].len().min(600)]);
    Ok(())
}
