use std::f64::consts::TAU;

use proptest::prelude::*;

use pdqc::circuit::scenarios::{random_circuit, RandomVocabulary};
use pdqc::circuit::{plan_swap_shuffle, split_angle, CapabilityProfile, TaggedCircuit};
use pdqc::crypto::{encrypt, CorrectionFrame, PadKey};
use pdqc::protocol::{run_protocol, ProtocolKind, ProtocolOptions};
use pdqc::rng::Streams;
use pdqc::runner::reference_state;
use pdqc::sim::{fidelity_up_to_global_phase, Gate, Qubit, StateVector};
use pdqc::Error;

fn circuit(seed: u64, n: usize, len: usize) -> TaggedCircuit {
    random_circuit(n, len, RandomVocabulary::default(), &mut Streams::new(seed).stream(99))
}

fn profile_for(kind: ProtocolKind, m: usize) -> CapabilityProfile {
    match kind {
        ProtocolKind::P2 => CapabilityProfile::full(m),
        ProtocolKind::P3 => CapabilityProfile::one_qubit_computers(m),
        ProtocolKind::P4 => CapabilityProfile::zero_qubit(),
    }
}

fn kind() -> impl Strategy<Value = ProtocolKind> {
    prop_oneof![Just(ProtocolKind::P2), Just(ProtocolKind::P3), Just(ProtocolKind::P4)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn honest_runs_reproduce_the_circuit(seed in any::<u64>(), n in 1usize..=4, len in 1usize..25,
                                         m in 1usize..=4, kind in kind(), density in 0.0f64..1.0) {
        let c = circuit(seed, n, len);
        let profile = profile_for(kind, m.min(n));
        let opts = ProtocolOptions { trap_density: density, ..Default::default() };
        match run_protocol(kind, &c, &profile, &opts, Streams::new(seed)) {
            Ok(run) => {
                let f = fidelity_up_to_global_phase(run.final_state.as_ref().unwrap(), &reference_state(&c).unwrap()).unwrap();
                prop_assert!(f > 1.0 - 1e-10, "fidelity {}", f);
                prop_assert!(run.summary.max_client_holdings <= profile.max_client_qubits);
            }
            Err(Error::CircuitUnsupportedByProfile(_)) => {}
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn runs_are_deterministic(seed in any::<u64>(), kind in kind()) {
        let c = circuit(seed, 3, 15);
        let profile = profile_for(kind, 2);
        let opts = ProtocolOptions::measured();
        let a = run_protocol(kind, &c, &profile, &opts, Streams::new(seed));
        let b = run_protocol(kind, &c, &profile, &opts, Streams::new(seed));
        match (a, b) {
            (Ok(a), Ok(b)) => {
                prop_assert_eq!(a.transcript.to_jsonl(), b.transcript.to_jsonl());
                prop_assert_eq!(a.bits, b.bits);
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "one run failed and the other did not"),
        }
    }

    #[test]
    fn server_instructions_carry_no_private_angles(seed in any::<u64>(), kind in prop_oneof![Just(ProtocolKind::P2), Just(ProtocolKind::P3)]) {
        let c = circuit(seed, 3, 20);
        let angles = c.private_angles();
        if let Ok(run) = run_protocol(kind, &c, &profile_for(kind, 2), &ProtocolOptions::default(), Streams::new(seed)) {
            let floats = run.server_view(1).floats();
            prop_assert!(floats.iter().all(|f| !angles.contains(f)));
        }
    }

    #[test]
    fn angle_shares_recombine(theta in -20.0f64..20.0, n in 1usize..6, seed in any::<u64>()) {
        let shares = split_angle(theta, n, &mut Streams::new(seed).stream(0)).unwrap();
        prop_assert_eq!(shares.len(), n);
        let diff = (shares.iter().sum::<f64>() - theta).rem_euclid(TAU);
        prop_assert!(diff < 1e-9 || TAU - diff < 1e-9, "off by {}", diff);
    }

    #[test]
    fn shuffles_are_bijections(labels in proptest::collection::btree_set(0u32..64, 1..12), seed in any::<u64>()) {
        let held: Vec<u32> = labels.iter().copied().collect();
        let p = plan_swap_shuffle(&held, &mut Streams::new(seed).stream(0)).unwrap();
        let mut image: Vec<u32> = held.iter().map(|&l| p.apply(l)).collect();
        image.sort();
        prop_assert_eq!(&image, &held);
        prop_assert!(p.inverse().after(&p).is_identity());
    }

    #[test]
    fn pad_then_frame_decrypt_is_identity(seed in any::<u64>(), a in 0u8..2, b in 0u8..2) {
        let mut rng = Streams::new(seed).stream(0);
        let original = StateVector::random([0u32, 1], &mut rng).unwrap();
        let mut s = original.clone();
        let mut frame = CorrectionFrame::new();
        encrypt(&mut s, &mut frame, Qubit(0), PadKey::new(a, b)).unwrap();
        encrypt(&mut s, &mut frame, Qubit(1), PadKey::new(b, a)).unwrap();
        for g in [Gate::h(0), Gate::cnot(0, 1), Gate::cz(1, 0), Gate::swap(0, 1)] {
            s.apply(&g).unwrap();
            frame.conjugate(&g).unwrap();
        }
        frame.decrypt(&mut s, &[Qubit(0), Qubit(1)]).unwrap();
        let mut want = original;
        want.apply_all(&[Gate::h(0), Gate::cnot(0, 1), Gate::cz(1, 0), Gate::swap(0, 1)]).unwrap();
        prop_assert!(fidelity_up_to_global_phase(&s, &want).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn circuit_json_round_trips(seed in any::<u64>(), n in 1usize..5, len in 1usize..20) {
        let c = circuit(seed, n, len);
        let back = TaggedCircuit::from_json(&c.to_json().unwrap()).unwrap();
        prop_assert_eq!(back.ops(), c.ops());
    }
}
