//! Protocols for an `M`-qubit client (multi-qubit gates allowed) and for `M`
//! one-qubit computers, sharing one scheduler.

use std::collections::{BTreeMap, BTreeSet};

use super::message::{Actor, MessageBody, RunSummary, Transcript};
use super::{OutputMode, ProtocolKind, ProtocolOptions, ProtocolRun};
use crate::adversary::{wrap_server, Origin, ServerActor};
use crate::circuit::{decompose_rzz, insert_traps, plan_swap_shuffle, CapabilityProfile, Dag, OpRole, TaggedCircuit, TrapPlan};
use crate::crypto::{encrypt, CorrectionFrame, KeySource, KeySourceMode, PadKey};
use crate::error::{Error, Result};
use crate::rng::{stream, SimRng, Streams};
use crate::sim::{Gate, GateKind, Qubit, StateVector};

const SERVER: Actor = Actor::Server(1);

/// A gate instruction as the server receives it.
#[derive(Clone, Debug, PartialEq)]
pub struct ServerInstruction {
    pub kind: GateKind,
    pub wires: Vec<u32>,
}

/// Gate kinds a server may apply to one-time-padded qubits.
fn server_kind(kind: &GateKind) -> bool {
    use GateKind::*;
    matches!(kind, X | Y | Z | H | S | Cnot | Cz | Swap | Ccz | Ccx)
}

/// Executes `instructions` on the server in order: each is logged, pushed
/// through the client's frame and (unless the server misbehaves) applied to
/// the shared state. `ports` maps the server's ports to logical qubits.
pub fn server_parallel_step(
    state: &mut StateVector,
    frame: &mut CorrectionFrame,
    ports: &BTreeMap<u32, Qubit>,
    server: &mut ServerActor,
    transcript: &mut Transcript,
    instructions: &[ServerInstruction],
) -> Result<()> {
    for ins in instructions {
        let targets = ins
            .wires
            .iter()
            .map(|w| ports.get(w).copied().ok_or_else(|| Error::ProtocolViolation(format!("server does not hold port {w}"))))
            .collect::<Result<Vec<_>>>()?;
        if !server_kind(&ins.kind) {
            return Err(Error::ProtocolViolation(format!("{} is not a public server gate", ins.kind.name())));
        }
        let gate = Gate::new(ins.kind, targets)?;
        frame.conjugate(&gate)?;
        transcript.push(
            Actor::Client,
            SERVER,
            MessageBody::Instruction { kind: ins.kind.name().to_string(), params: vec![], wires: ins.wires.clone() },
        );
        if server.should_apply(ins.kind.name(), &ins.wires) {
            state.apply(&gate)?;
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Loc {
    Client,
    Server,
    Measured,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Exec {
    ClientOnly,
    ServerOnly,
    Either,
}

/// Runs the protocol for a client holding up to `M` qubits that can apply
/// multi-qubit gates among them.
pub fn run_protocol2(
    circuit: &TaggedCircuit,
    profile: &CapabilityProfile,
    opts: &ProtocolOptions,
    streams: Streams,
) -> Result<ProtocolRun> {
    if profile.max_client_qubits == 0 || !profile.multiqubit_allowed {
        return Err(Error::BadArgument("this protocol needs a client with M >= 1 and multi-qubit gates".into()));
    }
    run_with_adversary(ProtocolKind::P2, circuit, profile, opts, streams)
}

/// Runs the protocol for `M` one-qubit client computers: every multi-qubit
/// gate goes to the server, `RZZ` is split so its angle stays local, and
/// optional trap pairs hide the circuit structure.
pub fn run_protocol3(
    circuit: &TaggedCircuit,
    profile: &CapabilityProfile,
    opts: &ProtocolOptions,
    streams: Streams,
) -> Result<ProtocolRun> {
    if profile.max_client_qubits == 0 || profile.multiqubit_allowed {
        return Err(Error::BadArgument("this protocol needs one-qubit client computers with M >= 1".into()));
    }
    run_with_adversary(ProtocolKind::P3, circuit, profile, opts, streams)
}

fn run_with_adversary(
    kind: ProtocolKind,
    circuit: &TaggedCircuit,
    profile: &CapabilityProfile,
    opts: &ProtocolOptions,
    streams: Streams,
) -> Result<ProtocolRun> {
    let mut server = wrap_server(&opts.behavior, streams.stream(stream::ADVERSARY));
    if matches!(opts.behavior, crate::adversary::ServerBehavior::DropRandomGate { .. }) {
        // The schedule does not depend on what the server really applies, so
        // an honest run with the same seed lists the instructions to come.
        let honest = ProtocolOptions { behavior: crate::adversary::ServerBehavior::Honest, ..opts.clone() };
        let dry = Engine::new(kind, circuit, profile, &honest, streams, wrap_server(&honest.behavior, streams.stream(stream::ADVERSARY)))?.run()?;
        server.plan_drops(&dry.instruction_origins);
    }
    Engine::new(kind, circuit, profile, opts, streams, server)?.run()
}

struct Engine<'a> {
    kind: ProtocolKind,
    circuit: TaggedCircuit,
    trap_plan: TrapPlan,
    dag: Dag,
    exec: Vec<Exec>,
    ops_on: Vec<Vec<usize>>,
    profile: &'a CapabilityProfile,
    opts: &'a ProtocolOptions,
    m: usize,
    shuffle: bool,
    server_corrections: bool,
    state: StateVector,
    frame: CorrectionFrame,
    loc: Vec<Option<Loc>>,
    wire: Vec<Option<u32>>,
    next_wire: u32,
    completed: Vec<bool>,
    executed_by: Vec<Option<Actor>>,
    bits: BTreeMap<Qubit, u8>,
    transcript: Transcript,
    summary: RunSummary,
    keys: KeySource,
    fallback_keys: KeySource,
    measure_rng: SimRng,
    shuffle_rng: SimRng,
    server: ServerActor,
    origins: Vec<Origin>,
    instruction_origins: Vec<Origin>,
}

impl<'a> Engine<'a> {
    fn new(
        kind: ProtocolKind,
        input: &TaggedCircuit,
        profile: &'a CapabilityProfile,
        opts: &'a ProtocolOptions,
        streams: Streams,
        server: ServerActor,
    ) -> Result<Self> {
        let n = input.n_qubits();
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
        let (circuit, trap_plan) = match kind {
            ProtocolKind::P3 => insert_traps(&decompose_rzz(input), opts.trap_density, &mut streams.stream(stream::TRAPS))?,
            _ => (decompose_rzz(input), TrapPlan::default()),
        };
        let m = profile.max_client_qubits;
        let exec = classify(kind, &circuit, profile, &origins)?;
        let mut ops_on = vec![Vec::new(); n];
        for (i, op) in circuit.ops().iter().enumerate() {
            for q in &op.gate.targets {
                ops_on[q.0 as usize].push(i);
            }
        }
        let len = circuit.len();
        let shuffle = opts.shuffle.unwrap_or(kind == ProtocolKind::P3) && profile.can_swap_ports;
        let summary = RunSummary {
            protocol: kind.name().to_string(),
            n_qubits: n,
            client_capacity: m,
            ..RunSummary::default()
        };
        Ok(Self {
            kind,
            dag: circuit.dag(),
            circuit,
            trap_plan,
            exec,
            ops_on,
            profile,
            opts,
            m,
            shuffle,
            server_corrections: kind == ProtocolKind::P3,
            state: StateVector::with_qubits(n),
            frame: CorrectionFrame::new(),
            loc: vec![None; n],
            wire: vec![None; n],
            next_wire: 0,
            completed: vec![false; len],
            executed_by: vec![None; len],
            bits: BTreeMap::new(),
            transcript: Transcript::new(),
            summary,
            keys: KeySource::new(opts.key_source, streams.stream(stream::KEYS)),
            fallback_keys: KeySource::new(KeySourceMode::PregeneratedPool, streams.child(1).stream(stream::KEYS)),
            measure_rng: streams.stream(stream::MEASURE),
            shuffle_rng: streams.stream(stream::SHUFFLE),
            server,
            origins,
            instruction_origins: Vec::new(),
        })
    }

    fn n(&self) -> usize {
        self.loc.len()
    }

    fn qubits_at(&self, place: Loc) -> Vec<Qubit> {
        (0..self.n()).filter(|&i| self.loc[i] == Some(place)).map(|i| Qubit(i as u32)).collect()
    }

    fn at(&self, q: Qubit, place: Loc) -> bool {
        self.loc[q.0 as usize] == Some(place)
    }

    fn holdings(&self) -> usize {
        self.loc.iter().filter(|l| **l == Some(Loc::Client)).count()
    }

    fn ready(&self, i: usize) -> bool {
        !self.completed[i] && self.dag.preds[i].iter().all(|&p| self.completed[p])
    }

    fn first_ready(&self, mut pred: impl FnMut(&Self, usize) -> bool) -> Option<usize> {
        (0..self.circuit.len()).find(|&i| self.ready(i) && pred(self, i))
    }

    fn finished(&self, q: Qubit) -> bool {
        self.ops_on[q.0 as usize].iter().all(|&i| self.completed[i])
    }

    /// Index of the next incomplete op on `q`, or `usize::MAX`.
    fn next_use(&self, q: Qubit) -> usize {
        self.ops_on[q.0 as usize].iter().copied().find(|&i| !self.completed[i]).unwrap_or(usize::MAX)
    }

    fn complete(&mut self, i: usize, by: Actor) {
        self.completed[i] = true;
        self.executed_by[i] = Some(by);
    }

    fn done(&self) -> bool {
        self.completed.iter().all(|&c| c)
            && (self.opts.output == OutputMode::Statevector || self.loc.iter().all(|l| *l == Some(Loc::Measured)))
    }

    fn ports(&self) -> BTreeMap<u32, Qubit> {
        (0..self.n())
            .filter(|&i| self.loc[i] == Some(Loc::Server))
            .map(|i| (self.wire[i].expect("server-held qubits have ports"), Qubit(i as u32)))
            .collect()
    }

    fn wires_of(&self, qs: &[Qubit]) -> Vec<u32> {
        qs.iter().map(|q| self.wire[q.0 as usize].expect("qubit has a port")).collect()
    }

    fn note_holdings(&mut self) {
        self.summary.max_client_holdings = self.summary.max_client_holdings.max(self.holdings());
    }

    fn run(mut self) -> Result<ProtocolRun> {
        self.generation_phase()?;
        let mut iterations = 0;
        while !self.done() {
            iterations += 1;
            if iterations > self.opts.max_iterations {
                return Err(Error::SchedulerStuck(format!("no completion after {iterations} iterations")));
            }
            let client = self.client_step()?;
            let server = self.server_step()?;
            if !client && !server && !self.done() {
                self.exchange()?;
            }
        }
        self.finish()
    }

    /// Rounds of generate / apply / encrypt / send, then the last group.
    fn generation_phase(&mut self) -> Result<()> {
        let n = self.n();
        let m = self.m;
        let groups = n.div_ceil(m);
        let last: Vec<Qubit> = ((groups - 1) * m..n).map(|i| Qubit(i as u32)).collect();
        for g in 0..groups - 1 {
            for i in g * m..(g + 1) * m {
                self.loc[i] = Some(Loc::Client);
            }
            self.note_holdings();
            self.client_step()?;
            let mut send = self.qubits_at(Loc::Client);
            if g + 2 == groups && self.kind == ProtocolKind::P2 {
                let keep = self.retained_for_last_group(&send, &last);
                send.retain(|q| !keep.contains(q));
            }
            if !send.is_empty() {
                self.send(&send)?;
            }
            self.server_step()?;
        }
        for &q in &last {
            self.loc[q.0 as usize] = Some(Loc::Client);
        }
        self.note_holdings();
        let have = self.holdings();
        if have < m {
            let want = self.last_round_requests(m - have);
            if !want.is_empty() {
                self.fetch_exact(&want)?;
            }
        }
        self.client_step()?;
        self.server_step()?;
        Ok(())
    }

    /// Qubits of the current group that share a multi-qubit gate with the
    /// last group, lowest labels first, as many as fit beside it.
    fn retained_for_last_group(&self, group: &[Qubit], last: &[Qubit]) -> BTreeSet<Qubit> {
        let room = self.m.saturating_sub(last.len());
        group
            .iter()
            .copied()
            .filter(|q| {
                self.circuit.ops().iter().any(|op| {
                    op.gate.arity() > 1 && op.gate.touches(*q) && last.iter().any(|l| op.gate.touches(*l))
                })
            })
            .take(room)
            .collect()
    }

    /// Server-held qubits worth fetching in the last round: those sharing an
    /// upcoming gate with a client qubit (for one-qubit clients: those with
    /// an upcoming client-only gate), earliest gate first.
    fn last_round_requests(&self, count: usize) -> Vec<Qubit> {
        let client: Vec<Qubit> = self.qubits_at(Loc::Client);
        let mut scored: Vec<(usize, Qubit)> = self
            .qubits_at(Loc::Server)
            .into_iter()
            .filter(|q| !self.frame.has_pending_on(*q))
            .filter_map(|q| {
                let first = self.ops_on[q.0 as usize].iter().copied().find(|&i| {
                    let g = &self.circuit.ops()[i].gate;
                    match self.kind {
                        ProtocolKind::P2 => g.arity() > 1 && client.iter().any(|c| g.touches(*c)),
                        _ => self.exec[i] == Exec::ClientOnly,
                    }
                })?;
                Some((first, q))
            })
            .collect();
        scored.sort();
        scored.into_iter().take(count).map(|(_, q)| q).collect()
    }

    fn client_can_run(&self, i: usize) -> bool {
        let op = &self.circuit.ops()[i];
        self.exec[i] != Exec::ServerOnly
            && op.gate.targets.iter().all(|&q| self.at(q, Loc::Client) && !self.frame.is_encrypted(q))
            && self.profile.permits(&op.gate.kind)
    }

    fn client_step(&mut self) -> Result<bool> {
        let mut progress = false;
        // Corrections the client can apply itself.
        if !self.server_corrections {
            while let Some(idx) = (0..self.frame.pending().len()).find(|&i| {
                self.frame.resolvable(i) && self.frame.pending()[i].targets.iter().all(|&q| self.at(q, Loc::Client))
            }) {
                self.frame.resolve_pending(&mut self.state, idx)?;
                self.summary.client_gates += 1;
                progress = true;
            }
        }
        for q in self.qubits_at(Loc::Client) {
            if self.frame.is_encrypted(q) && !self.frame.has_pending_on(q) {
                self.frame.decrypt(&mut self.state, &[q])?;
            }
        }
        while let Some(i) = self.first_ready(|e, i| e.client_can_run(i)) {
            let gate = self.circuit.ops()[i].gate.clone();
            self.state.apply(&gate)?;
            self.summary.client_gates += 1;
            self.complete(i, Actor::Client);
            progress = true;
        }
        if self.opts.output == OutputMode::Measure && self.profile.can_measure {
            for q in self.qubits_at(Loc::Client) {
                if self.finished(q) && !self.frame.is_encrypted(q) {
                    let rec = self.state.measure_z(q, &mut self.measure_rng)?;
                    self.bits.insert(q, rec.outcome);
                    self.loc[q.0 as usize] = Some(Loc::Measured);
                    self.summary.measurements += 1;
                    progress = true;
                }
            }
        }
        Ok(progress)
    }

    fn server_can_run(&self, i: usize) -> bool {
        let gate = &self.circuit.ops()[i].gate;
        self.exec[i] != Exec::ClientOnly
            && gate.targets.iter().all(|&q| self.at(q, Loc::Server))
            && self.frame.blocking_for_gate(gate).is_none()
    }

    fn instruct(&mut self, gate: &Gate, origin: Origin) -> Result<()> {
        let ports = self.ports();
        let ins = ServerInstruction { kind: gate.kind, wires: self.wires_of(&gate.targets) };
        server_parallel_step(&mut self.state, &mut self.frame, &ports, &mut self.server, &mut self.transcript, &[ins])?;
        self.instruction_origins.push(origin);
        self.summary.server_instructions += 1;
        Ok(())
    }

    /// Has the server apply correction `idx` of the frame to its qubits.
    fn instruct_correction(&mut self, idx: usize) -> Result<()> {
        let g = self.frame.pop_pending(idx)?;
        let origin = self.origins[g.targets[0].0 as usize];
        let wires = self.wires_of(&g.targets);
        self.transcript.push(
            Actor::Client,
            SERVER,
            MessageBody::Instruction { kind: g.kind.name().to_string(), params: vec![], wires: wires.clone() },
        );
        if self.server.should_apply(g.kind.name(), &wires) {
            self.state.apply(&g)?;
        }
        self.instruction_origins.push(origin);
        self.summary.server_instructions += 1;
        Ok(())
    }

    fn server_step(&mut self) -> Result<bool> {
        let mut progress = false;
        while let Some(i) = self.first_ready(|e, i| e.server_can_run(i)) {
            let gate = self.circuit.ops()[i].gate.clone();
            let origin = self.origins[gate.targets[0].0 as usize];
            self.instruct(&gate, origin)?;
            self.complete(i, SERVER);
            progress = true;
            if self.server_corrections {
                while !self.frame.pending().is_empty() {
                    self.instruct_correction(0)?;
                }
            }
        }
        if self.opts.output == OutputMode::Measure {
            let ready: Vec<Qubit> = self
                .qubits_at(Loc::Server)
                .into_iter()
                .filter(|&q| self.finished(q) && !self.frame.has_pending_on(q))
                .collect();
            if !ready.is_empty() {
                let wires = self.wires_of(&ready);
                self.transcript.push(Actor::Client, SERVER, MessageBody::MeasureRequest { wires: wires.clone() });
                for (&q, &w) in ready.iter().zip(&wires) {
                    let raw = self.state.measure_z(q, &mut self.measure_rng)?.outcome;
                    self.transcript.push(SERVER, Actor::Client, MessageBody::MeasureResult { wire: w, bit: raw });
                    let bit = self.frame.decrypt_measurement(q, raw)?;
                    self.frame.forget(q);
                    self.bits.insert(q, bit);
                    self.loc[q.0 as usize] = Some(Loc::Measured);
                    self.summary.measurements += 1;
                }
                progress = true;
            }
        }
        Ok(progress)
    }

    fn draw_key(&mut self) -> Result<PadKey> {
        let free = self.m.saturating_sub(self.holdings());
        let key = match self.keys.draw(free) {
            Err(Error::NoCapacity) => self.fallback_keys.draw(0)?,
            other => other?,
        };
        self.summary.keys_drawn += 1;
        Ok(key)
    }

    /// Encrypts plaintext qubits with fresh keys, shuffles ports if enabled
    /// and hands the batch to the server.
    fn send(&mut self, qubits: &[Qubit]) -> Result<()> {
        for &q in qubits {
            if !self.at(q, Loc::Client) {
                return Err(Error::ProtocolViolation(format!("client does not hold {q}")));
            }
            if !self.frame.is_encrypted(q) {
                let key = self.draw_key()?;
                encrypt(&mut self.state, &mut self.frame, q, key)?;
            }
            if self.wire[q.0 as usize].is_none() {
                self.wire[q.0 as usize] = Some(self.next_wire);
                self.next_wire += 1;
            }
        }
        if self.shuffle && qubits.len() > 1 {
            let wires = self.wires_of(qubits);
            let perm = plan_swap_shuffle(&wires, &mut self.shuffle_rng)?;
            for &q in qubits {
                let w = self.wire[q.0 as usize].as_mut().unwrap();
                *w = perm.apply(*w);
            }
            self.transcript
                .push(Actor::Client, Actor::Client, MessageBody::RelabelNotice { pairs: perm.pairs().collect() });
        }
        let mut wires = self.wires_of(qubits);
        wires.sort_unstable();
        for &q in qubits {
            self.loc[q.0 as usize] = Some(Loc::Server);
        }
        self.transcript.push(Actor::Client, SERVER, MessageBody::QubitTransfer { wires: wires.clone() });
        self.summary.sends += 1;
        let ports = self.ports();
        for w in self.server.probes_in(&wires) {
            let outcome = self.state.measure_z(ports[&w], self.server.rng())?.outcome;
            self.server.record_probe(w, outcome);
        }
        Ok(())
    }

    /// Moves `qubits` (all server-held) to the client.
    fn receive(&mut self, qubits: &[Qubit]) -> Result<()> {
        for &q in qubits {
            if !self.at(q, Loc::Server) {
                return Err(Error::ProtocolViolation(format!("server does not hold {q}")));
            }
        }
        let mut wires = self.wires_of(qubits);
        wires.sort_unstable();
        self.transcript.push(Actor::Client, SERVER, MessageBody::QubitRequest { wires: wires.clone() });
        self.transcript.push(SERVER, Actor::Client, MessageBody::QubitTransfer { wires });
        for &q in qubits {
            self.loc[q.0 as usize] = Some(Loc::Client);
        }
        self.note_holdings();
        if self.holdings() > self.m {
            return Err(Error::ProtocolViolation(format!("client holds {} qubits, capacity {}", self.holdings(), self.m)));
        }
        Ok(())
    }

    /// Brings `needed` to the client, evicting the held qubits used furthest
    /// in the future when space runs out.
    fn fetch(&mut self, needed: &[Qubit], fill_from: Option<usize>) -> Result<()> {
        let keep: BTreeSet<Qubit> = needed.iter().copied().collect();
        let mut bring: Vec<Qubit> = needed.iter().copied().filter(|&q| !self.at(q, Loc::Client)).collect();
        let held = self.qubits_at(Loc::Client);
        let overflow = (held.len() + bring.len()).saturating_sub(self.m);
        let mut candidates: Vec<Qubit> = held.iter().copied().filter(|q| !keep.contains(q)).collect();
        candidates.sort_by_key(|&q| (std::cmp::Reverse(self.next_use(q)), q));
        if candidates.len() < overflow {
            return Err(Error::SchedulerStuck(format!("cannot make room for {} qubits", bring.len())));
        }
        let evict: Vec<Qubit> = candidates[..overflow].to_vec();
        if let Some(after) = fill_from {
            let mut room = self.m - (held.len() - evict.len() + bring.len());
            let mut planned: BTreeSet<Qubit> = keep.clone();
            planned.extend(held.iter().filter(|q| !evict.contains(q)));
            for j in after + 1..self.circuit.len() {
                if room == 0 {
                    break;
                }
                if self.completed[j] || self.exec[j] != Exec::ClientOnly {
                    continue;
                }
                let targets = &self.circuit.ops()[j].gate.targets;
                if targets.iter().any(|q| !planned.contains(q) && !self.at(*q, Loc::Server)) {
                    continue;
                }
                let extra: Vec<Qubit> = targets
                    .iter()
                    .copied()
                    .filter(|q| !planned.contains(q) && !self.frame.has_pending_on(*q))
                    .collect();
                if extra.len() + targets.iter().filter(|q| planned.contains(q)).count() < targets.len() {
                    continue;
                }
                if extra.len() <= room {
                    room -= extra.len();
                    planned.extend(extra.iter().copied());
                    bring.extend(extra);
                }
            }
        }
        if bring.is_empty() {
            return Err(Error::SchedulerStuck("exchange moves no qubits".into()));
        }
        if !evict.is_empty() {
            self.send(&evict)?;
        }
        self.receive(&bring)
    }

    fn fetch_exact(&mut self, qubits: &[Qubit]) -> Result<()> {
        self.receive(qubits)
    }

    /// Clears pending correction `root`, at the client when it can apply
    /// two-qubit gates, otherwise at the server.
    fn resolve(&mut self, root: usize) -> Result<()> {
        let targets = self.frame.pending()[root].targets.clone();
        if self.server_corrections {
            let at_client: Vec<Qubit> = targets.iter().copied().filter(|&q| self.at(q, Loc::Client)).collect();
            if !at_client.is_empty() {
                return self.send(&at_client);
            }
            return self.instruct_correction(root);
        }
        self.fetch(&targets, None)
    }

    fn exchange(&mut self) -> Result<()> {
        self.summary.rounds += 1;
        if let Some(b) = self.first_ready(|_, _| true) {
            let gate = self.circuit.ops()[b].gate.clone();
            let all_client = gate.targets.iter().all(|&q| self.at(q, Loc::Client));
            let all_server = gate.targets.iter().all(|&q| self.at(q, Loc::Server));
            let at_server = match self.exec[b] {
                Exec::ClientOnly => false,
                Exec::ServerOnly => true,
                Exec::Either if all_client => false,
                Exec::Either if all_server => true,
                Exec::Either => true,
            };
            if at_server {
                if let Some(root) = self.frame.blocking_for_gate(&gate) {
                    return self.resolve(root);
                }
                let send: Vec<Qubit> = gate.targets.iter().copied().filter(|&q| self.at(q, Loc::Client)).collect();
                if send.is_empty() {
                    return Err(Error::SchedulerStuck(format!("server cannot run op {b} ({gate})")));
                }
                return self.send(&send);
            }
            if let Some(root) = self.frame.next_blocking(&gate.targets) {
                return self.resolve(root);
            }
            return self.fetch(&gate.targets, Some(b));
        }
        // Every gate is done; only measurements remain.
        for q in self.qubits_at(Loc::Server) {
            if let Some(root) = self.frame.next_blocking(&[q]) {
                return self.resolve(root);
            }
        }
        let stuck: Vec<Qubit> = self.qubits_at(Loc::Client);
        if !stuck.is_empty() && !self.profile.can_measure {
            return self.send(&stuck);
        }
        if let Some(&q) = stuck.iter().find(|&&q| self.frame.has_pending_on(q)) {
            if let Some(root) = self.frame.next_blocking(&[q]) {
                return self.resolve(root);
            }
        }
        Err(Error::SchedulerStuck("measurement phase made no progress".into()))
    }

    fn finish(mut self) -> Result<ProtocolRun> {
        let final_state = match self.opts.output {
            OutputMode::Statevector => {
                let mut audit = self.state.clone();
                let labels: Vec<Qubit> = audit.labels().to_vec();
                self.frame.clone().decrypt(&mut audit, &labels)?;
                Some(audit)
            }
            OutputMode::Measure => None,
        };
        self.summary.ticks = self.transcript.len() as u64;
        Ok(ProtocolRun {
            protocol: self.kind,
            circuit: self.circuit,
            trap_plan: self.trap_plan,
            final_state,
            bits: self.bits,
            transcript: self.transcript,
            summary: self.summary,
            executed_by: self.executed_by,
            instruction_origins: self.instruction_origins,
            adversary: self.server.into_log(),
            shares: Vec::new(),
        })
    }
}

/// Decides who may run each op and rejects circuits the profile cannot
/// support. Public verifier gates always go to the server: they are the
/// checks on its honesty.
fn classify(kind: ProtocolKind, circuit: &TaggedCircuit, profile: &CapabilityProfile, origins: &[Origin]) -> Result<Vec<Exec>> {
    let m = profile.max_client_qubits;
    let mut out = Vec::with_capacity(circuit.len());
    let mut toffoli_on_server = false;
    for (i, op) in circuit.ops().iter().enumerate() {
        let g = &op.gate;
        let client_ok = profile.permits(&g.kind);
        let exec = match op.role {
            OpRole::Request { .. } => Exec::ClientOnly,
            OpRole::Trap { .. } => Exec::ServerOnly,
            OpRole::Circuit => {
                let server_ok = match kind {
                    ProtocolKind::P3 if g.arity() > 1 => server_kind(&g.kind),
                    _ => !op.tag.is_private() && server_kind(&g.kind),
                };
                let verifier = g.targets.iter().all(|q| origins[q.0 as usize] == Origin::Verifier);
                let forced_server = (kind == ProtocolKind::P3 && g.arity() > 1) || (verifier && server_ok);
                match (server_ok, client_ok && !forced_server) {
                    (true, true) => Exec::Either,
                    (true, false) => Exec::ServerOnly,
                    (false, true) => Exec::ClientOnly,
                    (false, false) => {
                        return Err(Error::CircuitUnsupportedByProfile(format!("op {i} ({g}) fits neither party")));
                    }
                }
            }
        };
        if exec != Exec::ClientOnly && matches!(g.kind, GateKind::Ccz | GateKind::Ccx) {
            toffoli_on_server = true;
        }
        out.push(exec);
    }
    if toffoli_on_server {
        let corrections_ok = match kind {
            ProtocolKind::P2 => m >= 2 && profile.permits(&GateKind::Cz) && profile.permits(&GateKind::Cnot),
            _ => m >= 2,
        };
        if !corrections_ok {
            return Err(Error::CircuitUnsupportedByProfile(
                "server-side Toffoli-class gates create two-qubit corrections this client cannot co-locate".into(),
            ));
        }
    }
    Ok(out)
}
