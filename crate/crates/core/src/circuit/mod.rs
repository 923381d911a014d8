//! Circuits with privacy tags, dependency analysis and the rewriting passes
//! the protocols rely on.

mod passes;
mod profile;
mod schedule;
pub mod scenarios;
mod tagged;

pub use passes::{
    decompose_rzz, insert_traps, plan_swap_shuffle, split_angle, split_private_angles, Permutation, TrapPair, TrapPlan,
};
pub use profile::{CapabilityProfile, SingleQubitKind};
pub use schedule::{frontier_by, ready_frontier};
pub use tagged::{CircuitOp, Dag, GateRecord, OpRole, Tag, TaggedCircuit};
