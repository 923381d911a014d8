//! Scenario runs and artifact export, as driven by the `pdqc` binary.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use crate::adversary::ServerBehavior;
use crate::circuit::scenarios::{self, QaoaAngles, QnnParams};
use crate::circuit::{CapabilityProfile, TaggedCircuit};
use crate::error::{Error, Result};
use crate::protocol::{OutputMode, ProtocolKind, ProtocolOptions, ProtocolRun, RunSummary};
use crate::rng::{stream, Streams};
use crate::sim::{fidelity_up_to_global_phase, StateVector};
use crate::stats::counts_match;
use crate::verification::{build_verifier, experiment_layout, run_interleaved, DetectionReport, InterleaveConfig, Verdict, VerifierStyle};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Grover3,
    Qaoa3,
    Qnn3,
}

impl Scenario {
    pub fn parse(name: &str) -> Option<Scenario> {
        match name {
            "grover3" => Some(Scenario::Grover3),
            "qaoa3" => Some(Scenario::Qaoa3),
            "qnn3" => Some(Scenario::Qnn3),
            _ => None,
        }
    }

    /// Builds the circuit. `angles` overrides the defaults: nine values for
    /// qaoa3 (six cost, three mixer) and qnn3 (three inputs, six weights).
    pub fn circuit(self, angles: Option<&[f64]>) -> Result<TaggedCircuit> {
        let nine = |a: &[f64]| -> Result<[f64; 9]> {
            a.try_into().map_err(|_| Error::BadArgument(format!("expected 9 angles, got {}", a.len())))
        };
        Ok(match (self, angles) {
            (Scenario::Grover3, None) => scenarios::grover3(),
            (Scenario::Grover3, Some(_)) => return Err(Error::BadArgument("grover3 takes no angles".into())),
            (Scenario::Qaoa3, a) => {
                let angles = match a {
                    None => QaoaAngles::default(),
                    Some(a) => {
                        let a = nine(a)?;
                        QaoaAngles { theta: a[..6].try_into().unwrap(), phi: a[6..].try_into().unwrap() }
                    }
                };
                scenarios::qaoa3(&angles)
            }
            (Scenario::Qnn3, a) => {
                let params = match a {
                    None => QnnParams::default(),
                    Some(a) => {
                        let a = nine(a)?;
                        QnnParams { x: a[..3].try_into().unwrap(), w: a[3..].try_into().unwrap() }
                    }
                };
                scenarios::qnn3(&params)
            }
        })
    }
}

#[derive(Clone, Debug)]
pub enum CircuitSource {
    Builtin(Scenario),
    File(PathBuf),
}

impl CircuitSource {
    /// A built-in scenario name, or else a path to circuit JSON.
    pub fn parse(text: &str) -> CircuitSource {
        Scenario::parse(text).map_or_else(|| CircuitSource::File(text.into()), CircuitSource::Builtin)
    }

    pub fn load(&self, angles: Option<&[f64]>) -> Result<TaggedCircuit> {
        match self {
            CircuitSource::Builtin(s) => s.circuit(angles),
            CircuitSource::File(path) => {
                if angles.is_some() {
                    return Err(Error::BadArgument("angles only apply to built-in scenarios".into()));
                }
                TaggedCircuit::from_json(&fs::read_to_string(path)?)
            }
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub source: CircuitSource,
    pub protocol: ProtocolKind,
    /// Client capacity; overrides the profile's when both are given.
    pub m: Option<usize>,
    pub profile: Option<CapabilityProfile>,
    pub seed: u64,
    /// Measured shots; 0 means a single statevector run.
    pub shots: usize,
    pub trap_density: f64,
    pub verify: bool,
    pub verifier_qubits: Option<usize>,
    pub adversary: ServerBehavior,
    pub angles: Option<Vec<f64>>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            source: CircuitSource::Builtin(Scenario::Grover3),
            protocol: ProtocolKind::P2,
            m: None,
            profile: None,
            seed: 0,
            shots: 0,
            trap_density: 0.0,
            verify: false,
            verifier_qubits: None,
            adversary: ServerBehavior::Honest,
            angles: None,
            out: None,
        }
    }
}

impl RunConfig {
    /// Profile from the file if given, else the protocol's natural one, with
    /// `m` applied on top.
    pub fn resolved_profile(&self) -> CapabilityProfile {
        let m = self.m.unwrap_or(2);
        let mut p = self.profile.clone().unwrap_or_else(|| match self.protocol {
            ProtocolKind::P2 => CapabilityProfile::full(m),
            ProtocolKind::P3 => CapabilityProfile::one_qubit_computers(m),
            ProtocolKind::P4 => CapabilityProfile::zero_qubit(),
        });
        if let Some(m) = self.m {
            p.max_client_qubits = m;
            if p.can_swap_ports && m < 2 {
                p.can_swap_ports = false;
            }
        }
        p
    }
}

/// What a scenario run produced, also written as `summary.json`.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub passed: bool,
    /// Statevector fidelity against plain simulation (statevector runs).
    pub fidelity: Option<f64>,
    pub shots: usize,
    pub counts: BTreeMap<String, usize>,
    pub reference: BTreeMap<String, f64>,
    pub summary: RunSummary,
    pub detection: Option<DetectionReport>,
    #[serde(skip)]
    pub run: Option<ProtocolRun>,
}

/// Outcome probabilities of a state, keyed by bitstring with qubit 0 first.
pub fn distribution(state: &StateVector) -> BTreeMap<String, f64> {
    let n = state.n_qubits();
    state
        .probabilities()
        .into_iter()
        .enumerate()
        .filter(|(_, p)| *p > 1e-12)
        .map(|(i, p)| ((0..n).map(|q| if (i >> q) & 1 == 1 { '1' } else { '0' }).collect(), p))
        .collect()
}

pub fn reference_state(circuit: &TaggedCircuit) -> Result<StateVector> {
    let mut s = StateVector::with_qubits(circuit.n_qubits());
    s.apply_all(circuit.gates())?;
    Ok(s)
}

pub fn run_scenario(cfg: &RunConfig) -> Result<RunReport> {
    let circuit = cfg.source.load(cfg.angles.as_deref())?;
    let profile = cfg.resolved_profile();
    let streams = Streams::new(cfg.seed);
    let reference = reference_state(&circuit)?;
    let reference_dist = distribution(&reference);
    let base = ProtocolOptions { trap_density: cfg.trap_density, behavior: cfg.adversary.clone(), ..Default::default() };
    let run_one = |opts: &ProtocolOptions, s: Streams| crate::protocol::run_protocol(cfg.protocol, &circuit, &profile, opts, s);

    let (first, fidelity, counts) = if cfg.shots == 0 {
        let run = run_one(&base, streams)?;
        let f = fidelity_up_to_global_phase(run.final_state.as_ref().expect("statevector run"), &reference)?;
        (run, Some(f), BTreeMap::new())
    } else {
        let opts = ProtocolOptions { output: OutputMode::Measure, ..base.clone() };
        let runs: Vec<ProtocolRun> =
            (0..cfg.shots).into_par_iter().map(|i| run_one(&opts, streams.child(i as u64))).collect::<Result<_>>()?;
        let mut counts = BTreeMap::new();
        for r in &runs {
            *counts.entry(r.bitstring()).or_insert(0) += 1;
        }
        (runs.into_iter().next().expect("shots > 0"), None, counts)
    };
    let mut passed = match fidelity {
        Some(f) => f > 1.0 - 1e-10,
        None => counts_match(&counts, &reference_dist, 3.0),
    };

    let detection = if cfg.verify {
        let n_prime = cfg.verifier_qubits.unwrap_or(circuit.n_qubits());
        let spec = build_verifier(
            n_prime,
            experiment_layout(n_prime),
            &circuit,
            VerifierStyle::PauliChecks,
            &mut streams.stream(stream::VERIFIER),
        )?;
        let icfg = InterleaveConfig {
            protocol: cfg.protocol,
            profile: profile.clone(),
            behavior: cfg.adversary.clone(),
            trap_density: cfg.trap_density,
            shots: cfg.shots.max(1),
        };
        let report = run_interleaved(&circuit, &spec, &icfg, streams.child(u64::MAX))?;
        passed &= report.verdict == Verdict::Honest;
        Some(report)
    } else {
        None
    };

    let report = RunReport {
        passed,
        fidelity,
        shots: cfg.shots,
        counts,
        reference: reference_dist,
        summary: first.summary.clone(),
        detection,
        run: Some(first),
    };
    if let Some(dir) = &cfg.out {
        write_artifacts(&report, dir)?;
    }
    Ok(report)
}

/// Writes `distribution.json`, `transcript.jsonl`, `summary.json`, one
/// `server<k>_view.json` per server and `adversary.json` into `dir`.
pub fn write_artifacts(report: &RunReport, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    #[derive(Serialize)]
    struct Distribution<'a> {
        shots: usize,
        counts: &'a BTreeMap<String, usize>,
        reference: &'a BTreeMap<String, f64>,
        fidelity: Option<f64>,
    }
    let dist = Distribution { shots: report.shots, counts: &report.counts, reference: &report.reference, fidelity: report.fidelity };
    fs::write(dir.join("distribution.json"), serde_json::to_string_pretty(&dist)? + "\n")?;
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(report)? + "\n")?;
    if let Some(run) = &report.run {
        run.transcript.write_jsonl(fs::File::create(dir.join("transcript.jsonl"))?)?;
        let servers: &[u8] = if run.protocol == ProtocolKind::P4 { &[1, 2] } else { &[1] };
        for &k in servers {
            fs::write(dir.join(format!("server{k}_view.json")), run.server_view(k).to_json()? + "\n")?;
        }
        fs::write(dir.join("adversary.json"), run.adversary.to_json()? + "\n")?;
    }
    Ok(())
}
