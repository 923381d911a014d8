//! Exact statevector simulation over labeled qubits.

mod gate;
mod state;

pub use gate::{Gate, GateKind, Qubit};
pub use state::{
    circuit_unitary, equal_up_to_phase, fidelity_up_to_global_phase, DensityMatrix, MeasurementRecord,
    StateVector, MAX_QUBITS,
};
