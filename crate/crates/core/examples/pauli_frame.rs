//! One-time pad a qubit pair, let an untrusted party run Clifford gates on
//! the ciphertext, and strip the pad using only the updated keys.

use pdqc::crypto::{encrypt, CorrectionFrame, PadKey};
use pdqc::rng::Streams;
use pdqc::sim::{fidelity_up_to_global_phase, Gate, Qubit, StateVector};

fn main() -> pdqc::Result<()> {
    let mut rng = Streams::new(1).stream(0);
    let plain = StateVector::random([0u32, 1], &mut rng)?;
    let gates = [Gate::h(0), Gate::cnot(0, 1), Gate::z(1), Gate::swap(0, 1)];

    let mut cipher = plain.clone();
    let mut frame = CorrectionFrame::new();
    encrypt(&mut cipher, &mut frame, Qubit(0), PadKey::new(1, 0))?;
    encrypt(&mut cipher, &mut frame, Qubit(1), PadKey::new(1, 1))?;

    for g in &gates {
        cipher.apply(g)?;
        frame.conjugate(g)?;
        let keys: Vec<String> = (0..2)
            .map(|q| frame.key(Qubit(q)).unwrap_or_default())
            .map(|k| format!("X^{} Z^{}", k.a, k.b))
            .collect();
        println!("after {:<12} keys {}", g.to_string(), keys.join(" | "));
    }
    frame.decrypt(&mut cipher, &[Qubit(0), Qubit(1)])?;

    let mut want = plain;
    want.apply_all(&gates)?;
    println!("fidelity after decryption: {:.12}", fidelity_up_to_global_phase(&cipher, &want)?);
    Ok(())
}
