//! Two servers and a relaying common node working for a client with no
//! quantum memory.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::message::{Actor, MessageBody, RunSummary, Transcript};
use super::{OutputMode, ProtocolKind, ProtocolOptions, ProtocolRun};
use crate::adversary::{wrap_server, Origin, ServerActor, ServerBehavior};
use crate::circuit::{decompose_rzz, insert_traps, plan_swap_shuffle, CapabilityProfile, OpRole, TaggedCircuit};
use crate::crypto::{encrypt, CorrectionFrame, PadKey};
use crate::error::{Error, Result};
use crate::rng::{stream, SimRng, Streams};
use crate::sim::{Gate, GateKind, Qubit, StateVector};

/// How one private rotation was split between the servers. Only the client
/// keeps these.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShareRecord {
    /// Index of the rotation in the scheduled circuit.
    pub op: usize,
    pub first_server: u8,
    pub first_share: f64,
    pub second_server: u8,
    pub second_share: f64,
}

/// Classical key source outside both servers. Each batch of pad bits is
/// checked for balance before use and redrawn if it fails.
pub struct KeyDealer {
    rng: SimRng,
    redraws: usize,
}

impl KeyDealer {
    pub fn new(rng: SimRng) -> Self {
        Self { rng, redraws: 0 }
    }

    /// Batches rejected by the balance check so far.
    pub fn redraws(&self) -> usize {
        self.redraws
    }

    /// Whether the count of ones in `bits` lies within three standard
    /// deviations of half.
    pub fn pool_is_balanced(bits: &[u8]) -> bool {
        if bits.is_empty() {
            return true;
        }
        let n = bits.len() as f64;
        let ones = bits.iter().filter(|&&b| b == 1).count() as f64;
        (ones - n / 2.0).abs() <= 3.0 * (n / 4.0).sqrt()
    }

    pub fn deal(&mut self, count: usize) -> Vec<PadKey> {
        loop {
            let bits: Vec<u8> = (0..2 * count).map(|_| self.rng.gen_range(0..=1)).collect();
            if Self::pool_is_balanced(&bits) {
                return bits.chunks(2).map(|c| PadKey::new(c[0], c[1])).collect();
            }
            self.redraws += 1;
        }
    }
}

fn other(server: u8) -> u8 {
    3 - server
}

fn is_rotation(kind: &GateKind) -> bool {
    matches!(kind, GateKind::Rx(_) | GateKind::Ry(_) | GateKind::Rz(_))
}

/// Runs a circuit for a client with `M = 0`.
///
/// Server 1 prepares the qubits. Each private rotation is applied as two
/// shares on consecutive servers; between servers the qubits pass through
/// the common node, which shuffles the ports and tells the client. The last
/// server to compute pads every qubit with keys from a [`KeyDealer`], the
/// other one measures and the client removes the pad from the bits.
pub fn run_protocol4(
    circuit: &TaggedCircuit,
    profile: &CapabilityProfile,
    opts: &ProtocolOptions,
    streams: Streams,
) -> Result<ProtocolRun> {
    if profile.max_client_qubits != 0 {
        return Err(Error::BadArgument("the two-server protocol takes a client with M = 0".into()));
    }
    let mut server = wrap_server(&opts.behavior, streams.stream(stream::ADVERSARY));
    if matches!(opts.behavior, ServerBehavior::DropRandomGate { .. }) {
        let honest = ProtocolOptions { behavior: ServerBehavior::Honest, ..opts.clone() };
        let dry = run(circuit, &honest, streams, wrap_server(&ServerBehavior::Honest, streams.stream(stream::ADVERSARY)))?;
        server.plan_drops(&dry.instruction_origins);
    }
    run(circuit, opts, streams, server)
}

fn run(circuit: &TaggedCircuit, opts: &ProtocolOptions, streams: Streams, mut server: ServerActor) -> Result<ProtocolRun> {
    let n = circuit.n_qubits();
    if n == 0 {
        return Err(Error::BadArgument("circuit has no qubits".into()));
    }
    if n > crate::sim::MAX_QUBITS {
        return Err(Error::TooLargeToSimulate(n));
    }
    let origins = match &opts.origins {
        Some(o) if o.len() == n => o.clone(),
        Some(o) => return Err(Error::BadArgument(format!("{} origins for {n} qubits", o.len()))),
        None => vec![Origin::Original; n],
    };
    let (circuit, trap_plan) = insert_traps(&decompose_rzz(circuit), opts.trap_density, &mut streams.stream(stream::TRAPS))?;
    let ops = circuit.ops().to_vec();
    let dag = circuit.dag();
    let mut split_rng = streams.stream(stream::SPLIT);
    let mut shuffle_rng = streams.stream(stream::SHUFFLE);
    let mut measure_rng = streams.stream(stream::MEASURE);
    let mut dealer = KeyDealer::new(streams.stream(stream::KEYS));

    let mut state = StateVector::with_qubits(n);
    let mut frame = CorrectionFrame::new();
    let mut transcript = Transcript::new();
    let mut summary = RunSummary {
        protocol: ProtocolKind::P4.name().to_string(),
        n_qubits: n,
        client_capacity: 0,
        ..RunSummary::default()
    };
    // wire[q] is the port qubit q occupies at the current server.
    let mut wire: Vec<u32> = (0..n as u32).collect();
    let mut completed = vec![false; ops.len()];
    let mut half: BTreeMap<usize, (u8, f64)> = BTreeMap::new();
    let mut executed_by = vec![None; ops.len()];
    let mut shares = Vec::new();
    let mut instruction_origins = Vec::new();
    let mut current = 1u8;

    let ready = |completed: &[bool], i: usize| !completed[i] && dag.preds[i].iter().all(|&p| completed[p]);
    let split = |op: &crate::circuit::CircuitOp| op.tag.is_private() && is_rotation(&op.gate.kind);

    let mut instruct = |state: &mut StateVector,
                        transcript: &mut Transcript,
                        server_id: u8,
                        gate: &Gate,
                        params: Vec<f64>,
                        wires: Vec<u32>,
                        origin: Origin|
     -> Result<()> {
        transcript.push(
            Actor::Client,
            Actor::Server(server_id),
            MessageBody::Instruction { kind: gate.kind.name().to_string(), params, wires: wires.clone() },
        );
        if server.should_apply(gate.kind.name(), &wires) {
            state.apply(gate)?;
        }
        instruction_origins.push(origin);
        Ok(())
    };

    let mut hops = 0usize;
    loop {
        // The current server works until every remaining op waits on the other one.
        loop {
            let next = (0..ops.len()).find(|&i| {
                ready(&completed, i) && !matches!(ops[i].role, OpRole::Request { .. }) && !half.contains_key(&i)
            });
            let Some(i) = next else { break };
            let op = &ops[i];
            let wires: Vec<u32> = op.gate.targets.iter().map(|q| wire[q.0 as usize]).collect();
            let origin = origins[op.gate.targets[0].0 as usize];
            if split(op) {
                let theta = op.gate.kind.angle().expect("rotation");
                let first = split_rng.gen_range(0.0..TAU);
                let gate = Gate { kind: op.gate.kind.with_angle(first), targets: op.gate.targets.clone() };
                instruct(&mut state, &mut transcript, current, &gate, vec![first], wires, origin)?;
                half.insert(i, (current, theta));
                shares.push(ShareRecord { op: i, first_server: current, first_share: first, second_server: 0, second_share: 0.0 });
            } else {
                let params = op.gate.kind.angle().into_iter().collect();
                instruct(&mut state, &mut transcript, current, &op.gate, params, wires, origin)?;
                completed[i] = true;
                executed_by[i] = Some(Actor::Server(current));
            }
            summary.server_instructions += 1;
        }
        if completed.iter().all(|&c| c) {
            break;
        }
        if hops > opts.max_iterations {
            return Err(Error::SchedulerStuck("two-server schedule does not finish".into()));
        }
        // Requests between trap halves are served while the qubits are in transit.
        for i in 0..ops.len() {
            if matches!(ops[i].role, OpRole::Request { .. }) && ready(&completed, i) {
                completed[i] = true;
                executed_by[i] = Some(Actor::CommonNode);
            }
        }
        current = hop(&mut wire, current, &mut transcript, &mut shuffle_rng)?;
        hops += 1;
        summary.rounds += 1;
        summary.sends += 2;
        let pending: Vec<(usize, (u8, f64))> = std::mem::take(&mut half).into_iter().collect();
        for (i, (_, theta)) in pending {
            let op = &ops[i];
            let rec = shares.iter_mut().find(|r| r.op == i).expect("share recorded");
            let second = (theta - rec.first_share).rem_euclid(TAU);
            rec.second_server = current;
            rec.second_share = second;
            let gate = Gate { kind: op.gate.kind.with_angle(second), targets: op.gate.targets.clone() };
            let wires: Vec<u32> = op.gate.targets.iter().map(|q| wire[q.0 as usize]).collect();
            instruct(&mut state, &mut transcript, current, &gate, vec![second], wires, origins[op.gate.targets[0].0 as usize])?;
            summary.server_instructions += 1;
            completed[i] = true;
            executed_by[i] = Some(Actor::Server(current));
        }
    }

    // Pad every qubit at the last computing server.
    let keys = dealer.deal(n);
    summary.keys_drawn = n;
    let mut by_wire: Vec<(u32, Qubit)> = (0..n).map(|q| (wire[q], Qubit(q as u32))).collect();
    by_wire.sort();
    transcript.push(
        Actor::KeyDealer,
        Actor::Server(current),
        MessageBody::KeyDelivery {
            wires: by_wire.iter().map(|(w, _)| *w).collect(),
            keys: by_wire.iter().map(|(_, q)| (keys[q.0 as usize].a, keys[q.0 as usize].b)).collect(),
        },
    );
    transcript.push(
        Actor::KeyDealer,
        Actor::Client,
        MessageBody::KeyDelivery {
            wires: by_wire.iter().map(|(w, _)| *w).collect(),
            keys: by_wire.iter().map(|(_, q)| (keys[q.0 as usize].a, keys[q.0 as usize].b)).collect(),
        },
    );
    for (q, &key) in keys.iter().enumerate().take(n) {
        encrypt(&mut state, &mut frame, Qubit(q as u32), key)?;
    }

    let mut bits = BTreeMap::new();
    let final_state = match opts.output {
        OutputMode::Statevector => {
            let labels: Vec<Qubit> = (0..n as u32).map(Qubit).collect();
            frame.clone().decrypt(&mut state, &labels)?;
            Some(state)
        }
        OutputMode::Measure => {
            current = hop(&mut wire, current, &mut transcript, &mut shuffle_rng)?;
            summary.sends += 2;
            let mut by_wire: Vec<(u32, Qubit)> = (0..n).map(|q| (wire[q], Qubit(q as u32))).collect();
            by_wire.sort();
            transcript.push(
                Actor::Client,
                Actor::Server(current),
                MessageBody::MeasureRequest { wires: by_wire.iter().map(|(w, _)| *w).collect() },
            );
            for (w, q) in by_wire {
                let raw = state.measure_z(q, &mut measure_rng)?.outcome;
                transcript.push(Actor::Server(current), Actor::Client, MessageBody::MeasureResult { wire: w, bit: raw });
                bits.insert(q, frame.decrypt_measurement(q, raw)?);
                summary.measurements += 1;
            }
            None
        }
    };
    summary.ticks = transcript.len() as u64;
    Ok(ProtocolRun {
        protocol: ProtocolKind::P4,
        circuit,
        trap_plan,
        final_state,
        bits,
        transcript,
        summary,
        executed_by,
        instruction_origins,
        adversary: server.into_log(),
        shares,
    })
}

/// Moves every qubit from `from` through the common node to the other
/// server under a fresh random port permutation. Returns the new holder.
fn hop(wire: &mut [u32], from: u8, transcript: &mut Transcript, rng: &mut SimRng) -> Result<u8> {
    let to = other(from);
    let mut ports: Vec<u32> = wire.to_vec();
    ports.sort_unstable();
    transcript.push(Actor::Server(from), Actor::CommonNode, MessageBody::QubitTransfer { wires: ports.clone() });
    let perm = plan_swap_shuffle(&ports, rng)?;
    for w in wire.iter_mut() {
        *w = perm.apply(*w);
    }
    transcript.push(Actor::CommonNode, Actor::Client, MessageBody::RelabelNotice { pairs: perm.pairs().collect() });
    transcript.push(Actor::CommonNode, Actor::Server(to), MessageBody::QubitTransfer { wires: ports });
    Ok(to)
}
