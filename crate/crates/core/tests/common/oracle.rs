//! Dense-matrix reference implementations used to cross-check the
//! simulator. Everything here is built from Kronecker products of 2x2
//! Pauli-basis matrices and projectors, independently of the
//! statevector kernel.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use crate::sim::{Gate, GateKind, StateVector};

pub type Mat = DMatrix<Complex64>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn m2(a: [Complex64; 4]) -> Mat {
    DMatrix::from_row_slice(2, 2, &a)
}

pub fn id2() -> Mat {
    m2([c(1., 0.), c(0., 0.), c(0., 0.), c(1., 0.)])
}
pub fn px() -> Mat {
    m2([c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}
pub fn py() -> Mat {
    m2([c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}
pub fn pz() -> Mat {
    m2([c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}
pub fn p0() -> Mat {
    m2([c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)])
}
pub fn p1() -> Mat {
    m2([c(0., 0.), c(0., 0.), c(0., 0.), c(1., 0.)])
}

pub fn identity(n: usize) -> Mat {
    DMatrix::identity(1 << n, 1 << n)
}

/// Tensor product placing `ops[k].1` on qubit `ops[k].0` and identity
/// elsewhere. Qubit 0 is the least significant bit.
pub fn embed(n: usize, ops: &[(u32, Mat)]) -> Mat {
    let mut out = DMatrix::from_element(1, 1, c(1., 0.));
    for q in (0..n as u32).rev() {
        let m = ops.iter().find(|(p, _)| *p == q).map(|(_, m)| m.clone()).unwrap_or_else(id2);
        out = out.kronecker(&m);
    }
    out
}

fn rot(pauli: Mat, theta: f64) -> Mat {
    id2() * c((theta / 2.0).cos(), 0.0) - pauli * c(0.0, (theta / 2.0).sin())
}

/// Dense unitary of one gate on an `n`-qubit register.
pub fn gate_dense(n: usize, g: &Gate) -> Mat {
    let t: Vec<u32> = g.targets.iter().map(|q| q.0).collect();
    let one = |m: Mat| embed(n, &[(t[0], m)]);
    match g.kind {
        GateKind::I => identity(n),
        GateKind::H => one((px() + pz()) * c(std::f64::consts::FRAC_1_SQRT_2, 0.)),
        GateKind::X => one(px()),
        GateKind::Y => one(py()),
        GateKind::Z => one(pz()),
        GateKind::S => one(p0() + p1() * c(0., 1.)),
        GateKind::T => one(p0() + p1() * Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)),
        GateKind::Rx(a) => one(rot(px(), a)),
        GateKind::Ry(a) => one(rot(py(), a)),
        GateKind::Rz(a) => one(rot(pz(), a)),
        GateKind::Cnot => embed(n, &[(t[0], p0())]) + embed(n, &[(t[0], p1()), (t[1], px())]),
        GateKind::Cz => identity(n) - embed(n, &[(t[0], p1()), (t[1], p1())]) * c(2., 0.),
        GateKind::Ccz => identity(n) - embed(n, &[(t[0], p1()), (t[1], p1()), (t[2], p1())]) * c(2., 0.),
        GateKind::Ccx => {
            identity(n) - embed(n, &[(t[0], p1()), (t[1], p1())])
                + embed(n, &[(t[0], p1()), (t[1], p1()), (t[2], px())])
        }
        GateKind::Swap => {
            (identity(n)
                + embed(n, &[(t[0], px()), (t[1], px())])
                + embed(n, &[(t[0], py()), (t[1], py())])
                + embed(n, &[(t[0], pz()), (t[1], pz())]))
                * c(0.5, 0.)
        }
        GateKind::Rzz(a) => {
            identity(n) * c((a / 2.0).cos(), 0.) - embed(n, &[(t[0], pz()), (t[1], pz())]) * c(0., (a / 2.0).sin())
        }
    }
}

/// Product of gate unitaries, first gate applied first.
pub fn circuit_dense<'a>(n: usize, gates: impl IntoIterator<Item = &'a Gate>) -> Mat {
    gates.into_iter().fold(identity(n), |u, g| gate_dense(n, g) * u)
}

pub fn equal_up_to_phase(a: &Mat, b: &Mat, tol: f64) -> bool {
    if a.shape() != b.shape() {
        return false;
    }
    let inner: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    if inner.norm() < 1e-300 {
        return a.norm() < tol && b.norm() < tol;
    }
    let phase = inner / inner.norm();
    (a * phase - b).iter().all(|z| z.norm() < tol)
}

pub fn ket(s: &StateVector) -> DVector<Complex64> {
    DVector::from_column_slice(s.amplitudes())
}

pub fn density(s: &StateVector) -> Mat {
    let k = ket(s);
    &k * k.adjoint()
}

/// Partial trace keeping the qubits at `keep` positions (in that order,
/// first listed = least significant), by explicit index enumeration.
pub fn partial_trace(rho: &Mat, n: usize, keep: &[usize]) -> Mat {
    let traced: Vec<usize> = (0..n).filter(|p| !keep.contains(p)).collect();
    let k = keep.len();
    let mut out = DMatrix::zeros(1 << k, 1 << k);
    let compose = |sub: usize, env: usize| -> usize {
        let mut idx = 0;
        for (j, &p) in keep.iter().enumerate() {
            idx |= ((sub >> j) & 1) << p;
        }
        for (j, &p) in traced.iter().enumerate() {
            idx |= ((env >> j) & 1) << p;
        }
        idx
    };
    for r in 0..1 << k {
        for col in 0..1 << k {
            let mut acc = c(0., 0.);
            for e in 0..1 << traced.len() {
                acc += rho[(compose(r, e), compose(col, e))];
            }
            out[(r, col)] = acc;
        }
    }
    out
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
