//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use pdqc::adversary::ServerBehavior;
use pdqc::circuit::scenarios::{self, QaoaAngles, RandomVocabulary};
use pdqc::circuit::{CapabilityProfile, Tag, TaggedCircuit};
use pdqc::crypto::{encrypt, CorrectionFrame, PadKey};
use pdqc::protocol::{run_protocol, run_protocol2, run_protocol3, run_protocol4, OutputMode, ProtocolKind, ProtocolOptions};
use pdqc::rng::Streams;
use pdqc::runner::{distribution, reference_state};
use pdqc::sim::{self, fidelity_up_to_global_phase, Gate, GateKind, Qubit, StateVector};
use pdqc::stats::{counts_match, ks_uniform, mutual_information, within_sigma};
use pdqc::verification::{
    build_verifier, nondetection_probability, run_interleaved, InterleaveConfig, VerifierStyle,
};
use pdqc::Error;

#[path = "common/oracle.rs"]
mod oracle;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fidelity(c: &TaggedCircuit, run: &pdqc::protocol::ProtocolRun) -> Result<f64, String> {
    let got = run.final_state.as_ref().ok_or("no final state")?;
    fidelity_up_to_global_phase(got, &reference_state(c).map_err(|e| e.to_string())?).map_err(|e| e.to_string())
}

fn correctness() -> Outcome {
    let start = Instant::now();
    let opts = ProtocolOptions::default();
    let mut worst: f64 = 1.0;
    let mut runs = 0;
    let named = [
        ("grover3", scenarios::grover3()),
        ("qaoa3", scenarios::qaoa3(&Default::default())),
        ("qnn3", scenarios::qnn3(&Default::default())),
    ];
    for (name, c) in &named {
        let mut cases = vec![(ProtocolKind::P2, CapabilityProfile::full(2)), (ProtocolKind::P3, CapabilityProfile::one_qubit_computers(2))];
        if *name != "grover3" {
            cases.push((ProtocolKind::P3, CapabilityProfile::one_qubit_computers(1)));
        }
        for (kind, profile) in cases {
            let run = run_protocol(kind, c, &profile, &opts, Streams::new(11)).map_err(|e| format!("{name} {kind:?}: {e}"))?;
            let f = fidelity(c, &run)?;
            ensure(f > 1.0 - 1e-10, || format!("{name} {kind:?} M={} fidelity {f}", profile.max_client_qubits))?;
            worst = worst.min(f);
            runs += 1;
        }
    }
    // Toffoli with a single-qubit client has nowhere to run; that case must
    // be refused, not mis-executed.
    let refused = run_protocol3(&scenarios::grover3(), &CapabilityProfile::one_qubit_computers(1), &opts, Streams::new(1));
    ensure(matches!(refused, Err(Error::CircuitUnsupportedByProfile(_))), || "grover3 P3 M=1 was not refused".into())?;

    for i in 0..50u64 {
        let s = Streams::new(1000 + i);
        let mut rng = s.stream(99);
        let n = rng.gen_range(1..=5);
        let len = rng.gen_range(1..=30);
        let c = scenarios::random_circuit(n, len, RandomVocabulary::default(), &mut rng);
        let mut profiles = vec![(ProtocolKind::P4, CapabilityProfile::zero_qubit())];
        for m in 1..=n {
            profiles.push((ProtocolKind::P2, CapabilityProfile::full(m)));
            profiles.push((ProtocolKind::P3, CapabilityProfile::one_qubit_computers(m)));
        }
        for (kind, profile) in profiles {
            let o = ProtocolOptions { trap_density: if kind == ProtocolKind::P2 { 0.0 } else { 0.5 }, ..Default::default() };
            match run_protocol(kind, &c, &profile, &o, s) {
                Ok(run) => {
                    let f = fidelity(&c, &run)?;
                    ensure(f > 1.0 - 1e-10, || format!("random {i} {kind:?} M={}: fidelity {f}", profile.max_client_qubits))?;
                    ensure(run.summary.max_client_holdings <= profile.max_client_qubits, || format!("random {i}: capacity exceeded"))?;
                    worst = worst.min(f);
                    runs += 1;
                }
                Err(Error::CircuitUnsupportedByProfile(_)) => {}
                Err(e) => return Err(format!("random {i} {kind:?} M={}: {e}", profile.max_client_qubits)),
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1}s"))?;
    Ok(format!("{runs} runs, min fidelity {worst:.15}, {secs:.2}s"))
}

fn probe_states() -> Vec<StateVector> {
    let mut probes = Vec::new();
    for prep in [vec![], vec![Gate::x(0)], vec![Gate::h(0)], vec![Gate::x(0), Gate::h(0)]] {
        let mut s = StateVector::with_qubits(1);
        s.apply_all(&prep).unwrap();
        probes.push(s);
    }
    for sign in [0.5, -0.5] {
        let mut s = StateVector::with_qubits(1);
        s.apply(&Gate::rx(-std::f64::consts::PI * sign, 0)).unwrap();
        probes.push(s);
    }
    let mut rng = Streams::new(12).stream(0);
    for _ in 0..20 {
        probes.push(StateVector::random([0u32], &mut rng).unwrap());
    }
    probes
}

fn pad_privacy() -> Outcome {
    let probes = probe_states();
    ensure(probes.len() == 26, || "expected 26 probes".into())?;
    let half = DMatrix::<Complex64>::identity(2, 2) * Complex64::new(0.5, 0.0);
    let mut worst: f64 = 0.0;
    for psi in &probes {
        let mut avg = DMatrix::<Complex64>::zeros(2, 2);
        for key in PadKey::all() {
            let mut s = psi.clone();
            encrypt(&mut s, &mut CorrectionFrame::new(), Qubit(0), key).map_err(|e| e.to_string())?;
            avg += oracle::density(&s) * Complex64::new(0.25, 0.0);
        }
        worst = worst.max(oracle::max_abs_diff(&avg, &half));
    }
    ensure(worst < 1e-10, || format!("key average off by {worst:e}"))?;

    // A server probing the first qubit it receives. The plaintext bit is a
    // private X chosen per shot; the pad should hide it completely.
    let shots = 10_000;
    let behavior = ServerBehavior::MeasureAndResend { probes: vec![0] };
    let mut pairs = Vec::with_capacity(shots);
    let mut bit_rng = Streams::new(21).stream(0);
    for shot in 0..shots {
        let b: u8 = bit_rng.gen_range(0..2);
        let mut c = TaggedCircuit::new(2);
        if b == 1 {
            c.push(Gate::x(0), Tag::PrivateStructure).map_err(|e| e.to_string())?;
        }
        c.push(Gate::cnot(0, 1), Tag::Public).map_err(|e| e.to_string())?;
        let opts = ProtocolOptions { behavior: behavior.clone(), ..Default::default() };
        let run = run_protocol2(&c, &CapabilityProfile::full(1), &opts, Streams::new(shot as u64)).map_err(|e| e.to_string())?;
        let probe = run.adversary.probes.first().ok_or("port 0 never probed")?;
        pairs.push((b, probe.outcome));
    }
    let ones = pairs.iter().filter(|p| p.1 == 1).count();
    let sigma = (0.25 / shots as f64).sqrt();
    let bias = (ones as f64 / shots as f64 - 0.5).abs() / sigma;
    ensure(within_sigma(ones, shots, 0.5, 3.0), || format!("probe outcome bias {bias:.2} sigma"))?;
    let mi = mutual_information(&pairs);
    // Plug-in MI of independent bits has mean about 1/(2 n ln 2) ~ 7e-5.
    ensure(mi < 1e-3, || format!("mutual information {mi:e} bits"))?;
    Ok(format!("26 probes within {worst:.1e}; {ones}/{shots} ones ({bias:.2} sigma), MI {mi:.1e} bits"))
}

fn server_gates() -> Vec<Gate> {
    vec![
        Gate::x(0),
        Gate::new(GateKind::Y, [0]).unwrap(),
        Gate::z(0),
        Gate::h(0),
        Gate::new(GateKind::S, [0]).unwrap(),
        Gate::cnot(0, 1),
        Gate::cnot(1, 0),
        Gate::cz(0, 1),
        Gate::swap(0, 1),
        Gate::ccz(0, 1, 2),
        Gate::ccx(0, 1, 2),
        Gate::ccx(2, 0, 1),
    ]
}

/// Dense operator of encrypt, apply `g` to the ciphertext, update the frame
/// and decrypt, built column by column from basis states.
fn protocol_operator(n: usize, g: &Gate, keys: &BTreeMap<Qubit, PadKey>) -> Result<oracle::Mat, String> {
    let dim = 1 << n;
    let labels: Vec<Qubit> = (0..n as u32).map(Qubit).collect();
    let mut m = oracle::Mat::zeros(dim, dim);
    for col in 0..dim {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[col] = Complex64::new(1.0, 0.0);
        let mut s = StateVector::from_amplitudes(labels.clone(), amps).map_err(|e| e.to_string())?;
        let mut frame = CorrectionFrame::new();
        for (&q, &k) in keys {
            encrypt(&mut s, &mut frame, q, k).map_err(|e| e.to_string())?;
        }
        s.apply(g).map_err(|e| e.to_string())?;
        frame.conjugate(g).map_err(|e| e.to_string())?;
        frame.decrypt(&mut s, &labels).map_err(|e| e.to_string())?;
        for (row, a) in s.amplitudes().iter().enumerate() {
            m[(row, col)] = *a;
        }
    }
    Ok(m)
}

fn conjugation_soundness() -> Outcome {
    let n = 3;
    let mut checked = 0;
    for g in server_gates() {
        let combos = 1usize << (2 * g.arity());
        ensure(combos <= 64, || format!("{g}: {combos} key combinations"))?;
        for combo in 0..combos {
            let keys: BTreeMap<Qubit, PadKey> = g
                .targets
                .iter()
                .enumerate()
                .map(|(i, &q)| (q, PadKey::new((combo >> (2 * i)) as u8 & 1, (combo >> (2 * i + 1)) as u8 & 1)))
                .collect();
            let got = protocol_operator(n, &g, &keys)?;
            let want = oracle::gate_dense(n, &g);
            ensure(oracle::equal_up_to_phase(&got, &want, 1e-12), || format!("{g} with keys {keys:?}"))?;
            checked += 1;
        }
    }
    Ok(format!("{} gates, {checked} key combinations", server_gates().len()))
}

/// Every number anywhere in a JSON document.
fn json_numbers(text: &str) -> Result<Vec<f64>, String> {
    fn walk(v: &serde_json::Value, out: &mut Vec<f64>) {
        match v {
            serde_json::Value::Number(n) => out.extend(n.as_f64()),
            serde_json::Value::Array(a) => a.iter().for_each(|x| walk(x, out)),
            serde_json::Value::Object(o) => o.values().for_each(|x| walk(x, out)),
            _ => {}
        }
    }
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    walk(&v, &mut out);
    Ok(out)
}

fn contains_float_text(text: &str, x: f64) -> Result<bool, String> {
    Ok(json_numbers(text)?.contains(&x))
}

fn transcript_indistinguishability() -> Outcome {
    let profile = CapabilityProfile::one_qubit_computers(2);
    let opts = ProtocolOptions::default();
    let mut compared = 0;
    for seed in 0..20u64 {
        let mut rng = Streams::new(500 + seed).stream(0);
        let a = QaoaAngles::random(&mut rng);
        let b = QaoaAngles::random(&mut rng);
        let (ca, cb) = (scenarios::qaoa3(&a), scenarios::qaoa3(&b));
        let ra = run_protocol3(&ca, &profile, &opts, Streams::new(seed)).map_err(|e| e.to_string())?;
        let rb = run_protocol3(&cb, &profile, &opts, Streams::new(seed)).map_err(|e| e.to_string())?;
        for (c, r) in [(&ca, &ra), (&cb, &rb)] {
            let f = fidelity(c, r)?;
            ensure(f > 1.0 - 1e-10, || format!("seed {seed}: fidelity {f}"))?;
        }
        let va = ra.server_view(1).to_json().map_err(|e| e.to_string())?;
        let vb = rb.server_view(1).to_json().map_err(|e| e.to_string())?;
        ensure(va == vb, || format!("seed {seed}: server views differ"))?;
        for (c, r, text) in [(&ca, &ra, &va), (&cb, &rb, &vb)] {
            let floats = r.server_view(1).floats();
            for theta in c.private_angles() {
                ensure(!floats.contains(&theta), || format!("seed {seed}: angle {theta} in instruction params"))?;
                ensure(!contains_float_text(text, theta)?, || format!("seed {seed}: angle {theta} in view text"))?;
            }
        }
        compared += 1;
    }
    Ok(format!("{compared} seeds, views byte-identical, no angle values"))
}

fn p4_blinding() -> Outcome {
    let c = scenarios::qaoa3(&Default::default());
    let totals = c.private_angles();
    let profile = CapabilityProfile::zero_qubit();
    let mut shares = Vec::with_capacity(1000);
    for seed in 0..1000u64 {
        let run = run_protocol4(&c, &profile, &ProtocolOptions::default(), Streams::new(seed)).map_err(|e| e.to_string())?;
        let first = run.shares.first().ok_or("no split rotations")?;
        shares.push(first.first_share);
        if seed < 50 {
            for s in [1, 2] {
                let view = run.server_view(s);
                let floats = view.floats();
                let text = view.to_json().map_err(|e| e.to_string())?;
                for &theta in &totals {
                    ensure(!floats.contains(&theta), || format!("server {s} saw total angle {theta}"))?;
                    ensure(!contains_float_text(&text, theta)?, || format!("server {s} view text holds {theta}"))?;
                }
            }
        }
    }
    let ks = ks_uniform(&shares, 0.0, TAU);
    ensure(ks.p_value > 0.01, || format!("KS D={:.4} p={:.4}", ks.statistic, ks.p_value))?;

    let shots = 10_000;
    let opts = ProtocolOptions { output: OutputMode::Measure, ..Default::default() };
    let mut counts = BTreeMap::new();
    for shot in 0..shots {
        let run = run_protocol4(&c, &profile, &opts, Streams::new(1_000_000 + shot)).map_err(|e| e.to_string())?;
        *counts.entry(run.bitstring()).or_insert(0usize) += 1;
    }
    let reference = distribution(&reference_state(&c).map_err(|e| e.to_string())?);
    ensure(counts_match(&counts, &reference, 3.0), || format!("counts {counts:?} vs {reference:?}"))?;
    Ok(format!("KS p={:.3} over 1000 shares; no totals in either view; {shots} shots match", ks.p_value))
}

fn analytics() -> Outcome {
    let cases = [(1000, 1000, 2f64.powi(-1000)), (1000, 100, 4e-42), (1000, 10, 4.8e-5)];
    let mut parts = Vec::new();
    for (n, np, stated) in cases {
        let got = nondetection_probability(n, np, 1000);
        let rel = (got / stated - 1.0).abs();
        ensure(rel < 0.05, || format!("N={n} N'={np}: {got:e} vs {stated:e} ({:.1}%)", rel * 100.0))?;
        parts.push(format!("{got:.3e}"));
    }
    Ok(parts.join(", "))
}

fn empirics() -> Outcome {
    let start = Instant::now();
    let q = scenarios::qnn3(&Default::default());
    let spec = build_verifier(3, 1, &q, VerifierStyle::PauliChecks, &mut Streams::new(3).stream(0)).map_err(|e| e.to_string())?;
    let base = InterleaveConfig {
        protocol: ProtocolKind::P3,
        profile: CapabilityProfile::one_qubit_computers(2),
        behavior: ServerBehavior::Honest,
        trap_density: 0.0,
        shots: 10_000,
    };
    let honest = run_interleaved(&q, &spec, &base, Streams::new(40)).map_err(|e| e.to_string())?;
    ensure(honest.mismatches == 0, || format!("honest server: {} mismatches", honest.mismatches))?;
    let (go, gv) = (honest.original_instructions, honest.verifier_instructions);
    ensure(go == gv, || format!("instruction ratio {go}:{gv}"))?;

    let trials = 10_000;
    let mut parts = vec![format!("honest 0/10000, ratio {go}:{gv}")];
    for n in [1usize, 5, 10] {
        let cfg = InterleaveConfig {
            behavior: ServerBehavior::parse("drop:1").unwrap(),
            shots: n,
            ..base.clone()
        };
        let mut undetected = 0;
        for t in 0..trials {
            let r = run_interleaved(&q, &spec, &cfg, Streams::new(7).child(n as u64).child(t)).map_err(|e| e.to_string())?;
            if r.mismatches == 0 {
                undetected += 1;
            }
        }
        let p = 0.5f64.powi(n as i32);
        ensure(within_sigma(undetected, trials as usize, p, 3.0), || format!("n={n}: {undetected}/{trials} vs {p}"))?;
        parts.push(format!("n={n} {undetected}/{trials} (expect {p:.4})"));
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 300.0, || format!("took {secs:.0}s"))?;
    parts.push(format!("{secs:.1}s"));
    Ok(parts.join("; "))
}

fn grover() -> Outcome {
    let c = scenarios::grover3();
    let plain = reference_state(&c).map_err(|e| e.to_string())?;
    let dist = distribution(&plain);
    let p = dist.get("101").copied().unwrap_or(0.0) + dist.get("110").copied().unwrap_or(0.0);
    let shots = 10_000;
    let opts = ProtocolOptions::measured();
    let mut parts = Vec::new();
    for (kind, profile) in [
        (ProtocolKind::P2, CapabilityProfile::full(2)),
        (ProtocolKind::P3, CapabilityProfile::one_qubit_computers(2)),
        (ProtocolKind::P4, CapabilityProfile::zero_qubit()),
    ] {
        let mut hits = 0;
        for shot in 0..shots {
            let run = run_protocol(kind, &c, &profile, &opts, Streams::new(shot)).map_err(|e| e.to_string())?;
            let b = run.bitstring();
            if b == "101" || b == "110" {
                hits += 1;
            }
        }
        ensure(within_sigma(hits, shots as usize, p, 3.0), || format!("{kind:?}: {hits}/{shots} vs {p}"))?;
        parts.push(format!("{} {hits}/{shots}", kind.name()));
    }
    Ok(format!("plain {p:.6}; {}", parts.join(", ")))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 protocol correctness", correctness),
        ("2 pad privacy", pad_privacy),
        ("3 conjugation soundness", conjugation_soundness),
        ("4 transcript indistinguishability", transcript_indistinguishability),
        ("5 two-server blinding", p4_blinding),
        ("6 verification analytics", analytics),
        ("7 verification empirics", empirics),
        ("8 grover outcome quality", grover),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                println!("FAIL {name}: {why}");
                failed += 1;
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
