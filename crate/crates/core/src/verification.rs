//! Honest-execution checks: classically predictable verifier circuits run
//! alongside the real one, so a server that skips gates gets caught with a
//! probability that grows with the verifier's share of the work.
//!
//! Verifier circuits act on computational basis states only, so their
//! outcomes are deterministic. Two styles exist:
//!
//! * [`VerifierStyle::Structural`] mimics the real circuit's gate kinds. Each
//!   multi-qubit gate is placed where it flips a bit. Under the one-time pad
//!   a skipped CNOT only shows up when the control's X key bit differs from
//!   the control value, so each such drop is caught with probability 1/2.
//! * [`VerifierStyle::PauliChecks`] delegates only public `X` flips. The pad
//!   commutes with them, so every skipped check flips a verifier bit.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adversary::{Origin, ServerBehavior};
use crate::circuit::{CapabilityProfile, Tag, TaggedCircuit};
use crate::error::{Error, Result};
use crate::protocol::{run_protocol, OutputMode, ProtocolKind, ProtocolOptions};
use crate::rng::{stream, Streams};
use crate::sim::{Gate, GateKind, Qubit, StateVector};
use crate::stats::total_variation;

/// Largest verifier subcircuit the client is expected to simulate.
pub const MAX_VERIFIER_QUBITS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifierStyle {
    Structural,
    PauliChecks,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifierSpec {
    pub style: VerifierStyle,
    /// Subcircuit count `K`.
    pub k: usize,
    /// Qubits per subcircuit.
    pub p_v: usize,
    pub subcircuits: Vec<TaggedCircuit>,
    /// Deterministic Z outcome of each subcircuit, qubit 0 first.
    pub expected: Vec<Vec<u8>>,
}

impl VerifierSpec {
    /// Total verifier qubits `N' = K * P_v`.
    pub fn n_qubits(&self) -> usize {
        self.k * self.p_v
    }

    /// All subcircuits side by side on `N'` qubits.
    pub fn combined(&self) -> TaggedCircuit {
        self.subcircuits
            .iter()
            .fold(TaggedCircuit::new(0), |acc, c| acc.disjoint_union(c))
    }

    pub fn expected_bits(&self) -> Vec<u8> {
        self.expected.iter().flatten().copied().collect()
    }

    /// Public gates across all subcircuits; these are what the server runs.
    pub fn public_gates(&self) -> usize {
        self.subcircuits.iter().flat_map(|c| c.ops()).filter(|op| op.tag == Tag::Public).count()
    }
}

fn frequencies(h: &BTreeMap<&'static str, usize>) -> BTreeMap<&'static str, f64> {
    let n: usize = h.values().sum();
    h.iter().map(|(k, &c)| (*k, c as f64 / n.max(1) as f64)).collect()
}

/// Gate-kind histogram distance between two circuits (total variation of
/// the normalised kind counts).
pub fn structural_distance(a: &TaggedCircuit, b: &TaggedCircuit) -> f64 {
    total_variation(&frequencies(&a.kind_histogram()), &frequencies(&b.kind_histogram()))
}

/// Builds `k` verifier subcircuits on `n_prime / k` qubits each, with
/// single-qubit filler drawn from `template` so the gate-kind histogram
/// looks like the real circuit's. Each subcircuit gets about as many public
/// gates per qubit as the template has multi-qubit gates.
pub fn build_verifier(
    n_prime: usize,
    k: usize,
    template: &TaggedCircuit,
    style: VerifierStyle,
    rng: &mut impl Rng,
) -> Result<VerifierSpec> {
    if k == 0 || n_prime == 0 || !n_prime.is_multiple_of(k) {
        return Err(Error::BadArgument(format!("K = {k} must divide N' = {n_prime}")));
    }
    let p_v = n_prime / k;
    if p_v > MAX_VERIFIER_QUBITS {
        return Err(Error::TooLargeToSimulate(p_v));
    }
    let multi: Vec<GateKind> = template
        .circuit_gates()
        .map(|op| op.gate.kind)
        .filter(|g| g.arity() > 1 && g.arity() <= p_v)
        .map(|g| match g {
            GateKind::Rzz(_) => GateKind::Cnot,
            g => g,
        })
        .collect();
    let template_multi = template.circuit_gates().filter(|op| op.gate.arity() > 1).count();
    let per_sub = if template.n_qubits() == 0 || (p_v < 2 && style == VerifierStyle::Structural) {
        0
    } else {
        ((template_multi * p_v) as f64 / template.n_qubits() as f64).round().max(1.0) as usize
    };
    let mut subcircuits = Vec::with_capacity(k);
    let mut expected = Vec::with_capacity(k);
    for _ in 0..k {
        let c = match style {
            VerifierStyle::Structural => build_subcircuit(p_v, per_sub, &multi, template, rng),
            VerifierStyle::PauliChecks => build_checks(p_v, per_sub, template, rng),
        };
        expected.push(deterministic_outcome(&c)?);
        subcircuits.push(c);
    }
    Ok(VerifierSpec { style, k, p_v, subcircuits, expected })
}

fn build_checks(p: usize, n_checks: usize, template: &TaggedCircuit, rng: &mut impl Rng) -> TaggedCircuit {
    let mut c = TaggedCircuit::new(p);
    for q in 0..p as u32 {
        if rng.gen_bool(0.5) {
            c.push(Gate::x(q), Tag::PrivateStructure).expect("valid");
        }
    }
    for _ in 0..n_checks {
        c.push(Gate::x(rng.gen_range(0..p as u32)), Tag::Public).expect("valid");
    }
    pad_towards(&mut c, template, rng);
    c
}

fn build_subcircuit(p: usize, n_multi: usize, multi: &[GateKind], template: &TaggedCircuit, rng: &mut impl Rng) -> TaggedCircuit {
    let mut c = TaggedCircuit::new(p);
    let mut bits = vec![0u8; p];
    let client = Tag::PrivateStructure;
    let push = |c: &mut TaggedCircuit, g: Gate, tag: Tag| {
        c.push(g, tag).expect("verifier gates are well formed");
    };
    // Random starting bitstring.
    for (q, bit) in bits.iter_mut().enumerate().take(p) {
        if rng.gen_bool(0.5) {
            push(&mut c, Gate::x(q as u32), client);
            *bit ^= 1;
        }
    }
    let fallback = [GateKind::Cnot];
    let kinds = if multi.is_empty() { &fallback[..] } else { multi };
    for _ in 0..n_multi {
        let kind = *kinds.choose(rng).expect("nonempty");
        let mut qs: Vec<u32> = rand::seq::index::sample(rng, p, kind.arity()).into_iter().map(|q| q as u32).collect();
        qs.shuffle(rng);
        let target = *qs.last().unwrap();
        match kind {
            GateKind::Swap => {
                if bits[qs[0] as usize] == bits[qs[1] as usize] {
                    push(&mut c, Gate::x(qs[0]), client);
                    bits[qs[0] as usize] ^= 1;
                }
                bits.swap(qs[0] as usize, qs[1] as usize);
                push(&mut c, Gate::swap(qs[0], qs[1]), Tag::Public);
            }
            _ => {
                for &ctl in &qs[..qs.len() - 1] {
                    if bits[ctl as usize] == 0 {
                        push(&mut c, Gate::x(ctl), client);
                        bits[ctl as usize] = 1;
                    }
                }
                let z_type = matches!(kind, GateKind::Cz | GateKind::Ccz);
                if z_type {
                    push(&mut c, Gate::h(target), client);
                }
                push(&mut c, Gate { kind, targets: qs.iter().map(|&q| Qubit(q)).collect() }, Tag::Public);
                if z_type {
                    push(&mut c, Gate::h(target), client);
                }
                bits[target as usize] ^= 1;
            }
        }
    }
    pad_towards(&mut c, template, rng);
    c
}

/// Adds basis-preserving single-qubit filler (an `X`, or a gate followed by
/// its inverse) until the kind histogram is within 0.2 of the template's or
/// no filler brings it closer.
fn pad_towards(c: &mut TaggedCircuit, template: &TaggedCircuit, rng: &mut impl Rng) {
    let want = frequencies(&template.kind_histogram());
    let singles: Vec<GateKind> = template
        .circuit_gates()
        .map(|op| op.gate.kind)
        .filter(|g| g.arity() == 1 && *g != GateKind::I)
        .collect();
    if singles.is_empty() {
        return;
    }
    let added = |kind: &GateKind| match kind {
        GateKind::X | GateKind::Z | GateKind::S | GateKind::T => 1,
        _ => 2,
    };
    for _ in 0..400 {
        let counts = c.kind_histogram();
        let current = total_variation(&frequencies(&counts), &want);
        if current <= 0.2 {
            return;
        }
        // Add whichever kind brings the histogram closest; stop when none helps.
        let scored = singles.iter().map(|k| {
            let mut h = counts.clone();
            *h.entry(k.name()).or_insert(0) += added(k);
            (total_variation(&frequencies(&h), &want), k)
        });
        let Some((best, &kind)) = scored.min_by(|a, b| a.0.total_cmp(&b.0)) else { return };
        if best >= current - 1e-12 {
            return;
        }
        let q = rng.gen_range(0..c.n_qubits()) as u32;
        let tag = Tag::PrivateStructure;
        let g = Gate { kind, targets: vec![Qubit(q)] };
        match kind {
            GateKind::X | GateKind::Z => {
                c.push(g, tag).unwrap();
            }
            GateKind::S | GateKind::T => {
                // Diagonal: a phase on basis states, nothing to undo.
                c.push(g, tag).unwrap();
            }
            GateKind::Rx(t) | GateKind::Ry(t) | GateKind::Rz(t) => {
                c.push(g, tag).unwrap();
                c.push(Gate { kind: kind.with_angle(-t), targets: vec![Qubit(q)] }, tag).unwrap();
            }
            _ => {
                c.push(g.clone(), tag).unwrap();
                c.push(g, tag).unwrap();
            }
        }
    }
}

fn deterministic_outcome(c: &TaggedCircuit) -> Result<Vec<u8>> {
    let mut s = StateVector::with_qubits(c.n_qubits());
    s.apply_all(c.gates())?;
    (0..c.n_qubits() as u32)
        .map(|q| {
            let p1 = s.prob_one(Qubit(q))?;
            if p1 > 1.0 - 1e-9 {
                Ok(1)
            } else if p1 < 1e-9 {
                Ok(0)
            } else {
                Err(Error::VerificationUnsupported(format!("verifier qubit {q} is not deterministic (p1 = {p1})")))
            }
        })
        .collect()
}

/// `(1 / (1 + N'/N))^n`, the chance that `n` independent uniform picks among
/// `N + N'` qubits all land on the original `N`.
pub fn nondetection_probability(n: usize, n_prime: usize, shots: usize) -> f64 {
    nondetection_log10(n, n_prime, shots).map_or(0.0, |l| 10f64.powf(l))
}

/// Base-10 logarithm of [`nondetection_probability`]; `None` when `N = 0`.
pub fn nondetection_log10(n: usize, n_prime: usize, shots: usize) -> Option<f64> {
    if n == 0 {
        return None;
    }
    Some(-(shots as f64) * (1.0 + n_prime as f64 / n as f64).log10())
}

/// Same law with instruction counts: a single-gate dropper picks one of
/// `g_orig + g_verif` server instructions per shot.
pub fn nondetection_probability_gates(g_orig: usize, g_verif: usize, shots: usize) -> f64 {
    if g_orig + g_verif == 0 {
        return 1.0;
    }
    let ratio = g_orig as f64 / (g_orig + g_verif) as f64;
    (shots as f64 * ratio.ln()).exp()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Honest,
    Dishonest,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub shots: usize,
    /// Shots whose verifier bits differ from the prediction.
    pub mismatches: usize,
    pub verdict: Verdict,
    /// Qubit-count form of the non-detection probability for these shots.
    pub analytic_nondetection: f64,
    /// Instruction-count form, from the honest schedule of the first shot.
    pub analytic_nondetection_gates: f64,
    pub original_instructions: usize,
    pub verifier_instructions: usize,
    /// Outcome counts of the original circuit's qubits.
    pub original_counts: BTreeMap<String, usize>,
}

impl DetectionReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Protocol choice and settings for an interleaved run.
#[derive(Clone, Debug)]
pub struct InterleaveConfig {
    pub protocol: ProtocolKind,
    pub profile: CapabilityProfile,
    pub behavior: ServerBehavior,
    pub trap_density: f64,
    pub shots: usize,
}

/// Runs `original` and the verifier together as one circuit on `N + N'`
/// qubits, shuffling ports on every send, for `cfg.shots` independent shots.
/// Any shot whose verifier bits differ from the prediction marks the server
/// dishonest.
pub fn run_interleaved(original: &TaggedCircuit, spec: &VerifierSpec, cfg: &InterleaveConfig, streams: Streams) -> Result<DetectionReport> {
    if cfg.protocol != ProtocolKind::P4 && !cfg.profile.can_swap_ports {
        return Err(Error::VerificationUnsupported("the client cannot shuffle ports".into()));
    }
    let n = original.n_qubits();
    let combined = original.disjoint_union(&spec.combined());
    let mut origins = vec![Origin::Original; n];
    origins.extend(std::iter::repeat_n(Origin::Verifier, spec.n_qubits()));
    let opts = ProtocolOptions {
        output: OutputMode::Measure,
        trap_density: cfg.trap_density,
        shuffle: Some(true),
        behavior: cfg.behavior.clone(),
        origins: Some(origins),
        ..ProtocolOptions::default()
    };
    let expected = spec.expected_bits();
    let shots: Vec<(bool, String, usize, usize)> = (0..cfg.shots)
        .into_par_iter()
        .map(|shot| {
            let run = run_protocol(cfg.protocol, &combined, &cfg.profile, &opts, streams.child(shot as u64))?;
            let bits: Vec<u8> = run.bits.values().copied().collect();
            let mismatch = bits[n..] != expected[..];
            let orig: String = bits[..n].iter().map(|b| if *b == 1 { '1' } else { '0' }).collect();
            let v = run.instruction_origins.iter().filter(|o| **o == Origin::Verifier).count();
            Ok((mismatch, orig, run.instruction_origins.len() - v, v))
        })
        .collect::<Result<_>>()?;
    let mismatches = shots.iter().filter(|s| s.0).count();
    let mut original_counts = BTreeMap::new();
    for s in &shots {
        *original_counts.entry(s.1.clone()).or_insert(0) += 1;
    }
    let (g_orig, g_verif) = shots.first().map_or((0, 0), |s| (s.2, s.3));
    Ok(DetectionReport {
        shots: cfg.shots,
        mismatches,
        verdict: if mismatches > 0 { Verdict::Dishonest } else { Verdict::Honest },
        analytic_nondetection: nondetection_probability(n, spec.n_qubits(), cfg.shots),
        analytic_nondetection_gates: nondetection_probability_gates(g_orig, g_verif, cfg.shots),
        original_instructions: g_orig,
        verifier_instructions: g_verif,
        original_counts,
    })
}

/// One row of the detection experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N'")]
    pub n_prime: usize,
    #[serde(rename = "n")]
    pub shots: usize,
    pub trials: usize,
    pub empirical_nondetect: f64,
    pub analytic_nondetect: f64,
    /// Instruction-count form, the law the Monte-Carlo should follow.
    pub analytic_nondetect_gates: f64,
    pub log10_analytic: f64,
}

/// How trials are simulated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentMode {
    /// Every shot is a full protocol run on the simulator.
    Simulated,
    /// Only the adversary's pick is sampled, against the honest instruction
    /// schedule. Valid because every verifier instruction is a bit-flipping
    /// gate, which [`run_interleaved`] tests confirm is always caught.
    Schedule,
}

/// Settings for the detection experiment.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub n: usize,
    pub n_prime: usize,
    pub shots: usize,
    pub trials: usize,
    pub mode: ExperimentMode,
}

/// Original circuit used by the experiment: a random circuit on `n` qubits
/// with three gates per qubit.
pub fn experiment_circuit(n: usize, streams: Streams) -> TaggedCircuit {
    let vocab = crate::circuit::scenarios::RandomVocabulary { toffoli: false, rzz: true };
    crate::circuit::scenarios::random_circuit(n, 3 * n, vocab, &mut streams.stream(stream::CIRCUIT))
}

/// Verifier layout for `N'` qubits: subcircuits of at most five qubits.
pub fn experiment_layout(n_prime: usize) -> usize {
    (1..=n_prime).find(|k| n_prime.is_multiple_of(*k) && n_prime / k <= 5).unwrap_or(n_prime)
}

/// Estimates how often a server dropping one random instruction per shot
/// goes unnoticed against a Pauli-check verifier for `shots` consecutive shots, using one-qubit client
/// computers (`M = 2`) so every multi-qubit gate is a server instruction.
pub fn run_verification_experiment(cfg: &ExperimentConfig, streams: Streams) -> Result<ExperimentRow> {
    if cfg.n == 0 || cfg.shots == 0 || cfg.trials == 0 {
        return Err(Error::BadArgument("N, n and trials must be positive".into()));
    }
    let original = experiment_circuit(cfg.n, streams);
    let spec = if cfg.n_prime == 0 {
        VerifierSpec { style: VerifierStyle::PauliChecks, k: 0, p_v: 0, subcircuits: vec![], expected: vec![] }
    } else {
        let k = experiment_layout(cfg.n_prime);
        build_verifier(cfg.n_prime, k, &original, VerifierStyle::PauliChecks, &mut streams.stream(stream::VERIFIER))?
    };
    let profile = CapabilityProfile::one_qubit_computers(2);
    let base = InterleaveConfig {
        protocol: ProtocolKind::P3,
        profile: profile.clone(),
        behavior: ServerBehavior::Honest,
        trap_density: 0.0,
        shots: 1,
    };
    let honest = run_interleaved(&original, &spec, &base, streams.child(u64::MAX))?;
    if honest.mismatches != 0 {
        return Err(Error::VerificationUnsupported("honest verifier run mismatched".into()));
    }
    let (g_orig, g_verif) = (honest.original_instructions, honest.verifier_instructions);
    let undetected: usize = match cfg.mode {
        ExperimentMode::Simulated => {
            let cfg_drop = InterleaveConfig {
                behavior: ServerBehavior::DropRandomGate { count: 1, scope: crate::adversary::DropScope::All },
                shots: cfg.shots,
                ..base
            };
            let outcomes: Vec<bool> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| Ok(run_interleaved(&original, &spec, &cfg_drop, streams.child(t as u64))?.mismatches == 0))
                .collect::<Result<_>>()?;
            outcomes.into_iter().filter(|&u| u).count()
        }
        ExperimentMode::Schedule => (0..cfg.trials)
            .into_par_iter()
            .filter(|&t| {
                let mut rng = streams.child(t as u64).stream(stream::ADVERSARY);
                (0..cfg.shots).all(|_| rng.gen_range(0..g_orig + g_verif) < g_orig)
            })
            .count(),
    };
    Ok(ExperimentRow {
        n: cfg.n,
        n_prime: cfg.n_prime,
        shots: cfg.shots,
        trials: cfg.trials,
        empirical_nondetect: undetected as f64 / cfg.trials as f64,
        analytic_nondetect: nondetection_probability(cfg.n, cfg.n_prime, cfg.shots),
        analytic_nondetect_gates: nondetection_probability_gates(g_orig, g_verif, cfg.shots),
        log10_analytic: nondetection_log10(cfg.n, cfg.n_prime, cfg.shots).unwrap_or(f64::NEG_INFINITY),
    })
}

/// Writes experiment rows as CSV with a header.
pub fn write_csv(rows: &[ExperimentRow], out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}
