//! Plain statevector simulation: a GHZ state, its outcome distribution and a
//! reduced density matrix.

use pdqc::runner::distribution;
use pdqc::sim::{Gate, Qubit, StateVector};

fn main() -> pdqc::Result<()> {
    let mut s = StateVector::with_qubits(3);
    s.apply_all(&[Gate::h(0), Gate::cnot(0, 1), Gate::cnot(1, 2)])?;
    for (bits, p) in distribution(&s) {
        println!("{bits}  {p:.3}");
    }
    // Tracing out two qubits of a GHZ state leaves a classical mixture.
    let rho = s.reduced_density_matrix(&[Qubit(0)])?;
    println!("rho(q0) =\n{rho:.3}");
    Ok(())
}
