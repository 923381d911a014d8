//! Hide verifier qubits among the real ones and catch a server that skips
//! one gate per shot.

use pdqc::adversary::ServerBehavior;
use pdqc::circuit::{scenarios, CapabilityProfile};
use pdqc::protocol::ProtocolKind;
use pdqc::rng::Streams;
use pdqc::verification::{
    build_verifier, nondetection_probability, run_interleaved, InterleaveConfig, VerifierStyle,
};

fn main() -> pdqc::Result<()> {
    let circuit = scenarios::qnn3(&Default::default());
    let spec = build_verifier(3, 1, &circuit, VerifierStyle::PauliChecks, &mut Streams::new(3).stream(0))?;
    println!("verifier expects {:?}", spec.expected);

    let base = InterleaveConfig {
        protocol: ProtocolKind::P3,
        profile: CapabilityProfile::one_qubit_computers(2),
        behavior: ServerBehavior::Honest,
        trap_density: 0.0,
        shots: 5,
    };
    for behavior in ["honest", "drop:1", "drop:1:original", "drop:1:verifier"] {
        let cfg = InterleaveConfig { behavior: ServerBehavior::parse(behavior)?, ..base.clone() };
        let r = run_interleaved(&circuit, &spec, &cfg, Streams::new(10))?;
        println!("{behavior:<16} {:?}: {} of {} shots mismatched", r.verdict, r.mismatches, r.shots);
    }

    for (n, n_prime) in [(1000, 1000), (1000, 100), (1000, 10)] {
        println!("N={n} N'={n_prime} n=1000: non-detection {:.3e}", nondetection_probability(n, n_prime, 1000));
    }
    Ok(())
}
