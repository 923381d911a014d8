use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::gate::{Gate, GateKind, Qubit};
use crate::error::{Error, Result};

pub type DensityMatrix = DMatrix<Complex64>;

/// Largest register the simulator will allocate.
pub const MAX_QUBITS: usize = 22;

/// Dense statevector over labeled qubits.
///
/// Amplitude index bit `j` belongs to `labels[j]` (little-endian by label
/// position).
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    labels: Vec<Qubit>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub label: Qubit,
    pub outcome: u8,
    pub probability: f64,
}

impl StateVector {
    /// `|0...0>` over the given labels.
    pub fn zero(labels: impl IntoIterator<Item = impl Into<Qubit>>) -> Result<StateVector> {
        let labels: Vec<Qubit> = labels.into_iter().map(Into::into).collect();
        Self::check_labels(&labels)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << labels.len()];
        amplitudes[0] = Complex64::new(1.0, 0.0);
        Ok(StateVector { amplitudes, labels })
    }

    /// `|0...0>` over labels `0..n`.
    pub fn with_qubits(n: usize) -> StateVector {
        Self::zero((0..n as u32).map(Qubit)).expect("sequential labels are unique")
    }

    /// Normalizes the supplied amplitudes.
    pub fn from_amplitudes(
        labels: impl IntoIterator<Item = impl Into<Qubit>>,
        amplitudes: Vec<Complex64>,
    ) -> Result<StateVector> {
        let labels: Vec<Qubit> = labels.into_iter().map(Into::into).collect();
        Self::check_labels(&labels)?;
        if amplitudes.len() != 1 << labels.len() {
            return Err(Error::BadArgument(format!(
                "{} amplitudes for {} qubits",
                amplitudes.len(),
                labels.len()
            )));
        }
        let norm = amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::BadArgument("amplitudes have zero or non-finite norm".into()));
        }
        let amplitudes = amplitudes.into_iter().map(|a| a / norm).collect();
        Ok(StateVector { amplitudes, labels })
    }

    /// Haar-ish random state (normalized complex Gaussian amplitudes).
    pub fn random(labels: impl IntoIterator<Item = impl Into<Qubit>>, rng: &mut impl Rng) -> Result<StateVector> {
        let labels: Vec<Qubit> = labels.into_iter().map(Into::into).collect();
        let amps = (0..1usize << labels.len())
            .map(|_| {
                let (u1, u2): (f64, f64) = (rng.gen::<f64>().max(1e-300), rng.gen());
                let r = (-2.0 * u1.ln()).sqrt();
                let th = std::f64::consts::TAU * u2;
                Complex64::new(r * th.cos(), r * th.sin())
            })
            .collect();
        Self::from_amplitudes(labels, amps)
    }

    fn check_labels(labels: &[Qubit]) -> Result<()> {
        if labels.len() > MAX_QUBITS {
            return Err(Error::BadArgument(format!("{} qubits exceeds {MAX_QUBITS}", labels.len())));
        }
        let mut sorted = labels.to_vec();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::BadArgument("duplicate qubit label".into()));
        }
        Ok(())
    }

    pub fn n_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Qubit] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn position(&self, q: Qubit) -> Result<usize> {
        self.labels.iter().position(|&l| l == q).ok_or(Error::UnknownQubit(q))
    }

    pub fn apply(&mut self, gate: &Gate) -> Result<()> {
        gate.validate()?;
        let positions = gate
            .targets
            .iter()
            .map(|&q| self.position(q))
            .collect::<Result<Vec<_>>>()?;
        match gate.kind {
            GateKind::I => {}
            GateKind::Swap => self.swap_positions(positions[0], positions[1]),
            _ => self.apply_matrix(&positions, &gate.kind.matrix()),
        }
        Ok(())
    }

    pub fn apply_all<'a>(&mut self, gates: impl IntoIterator<Item = &'a Gate>) -> Result<()> {
        gates.into_iter().try_for_each(|g| self.apply(g))
    }

    /// Applies a `2^k x 2^k` row-major matrix to the qubits at `positions`.
    pub(crate) fn apply_matrix(&mut self, positions: &[usize], m: &[Complex64]) {
        let k = positions.len();
        let dim = 1usize << k;
        debug_assert_eq!(m.len(), dim * dim);
        let mask: usize = positions.iter().map(|p| 1usize << p).sum();
        let offsets: Vec<usize> = (0..dim)
            .map(|j| (0..k).filter(|b| j >> b & 1 == 1).map(|b| 1usize << positions[b]).sum())
            .collect();
        let mut gathered = vec![Complex64::new(0.0, 0.0); dim];
        for base in 0..self.amplitudes.len() {
            if base & mask != 0 {
                continue;
            }
            for (slot, off) in gathered.iter_mut().zip(&offsets) {
                *slot = self.amplitudes[base | off];
            }
            for (row, off) in offsets.iter().enumerate() {
                let mut acc = Complex64::new(0.0, 0.0);
                for (col, v) in gathered.iter().enumerate() {
                    acc += m[row * dim + col] * v;
                }
                self.amplitudes[base | off] = acc;
            }
        }
    }

    fn swap_positions(&mut self, a: usize, b: usize) {
        let (ma, mb) = (1usize << a, 1usize << b);
        for i in 0..self.amplitudes.len() {
            if i & ma != 0 && i & mb == 0 {
                self.amplitudes.swap(i, i ^ ma ^ mb);
            }
        }
    }

    /// Probability that `q` reads 1 in the Z basis.
    pub fn prob_one(&self, q: Qubit) -> Result<f64> {
        let mask = 1usize << self.position(q)?;
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Projective Z measurement with Born sampling; collapses and renormalizes.
    pub fn measure_z(&mut self, q: Qubit, rng: &mut impl Rng) -> Result<MeasurementRecord> {
        let p1 = self.prob_one(q)?;
        let outcome = u8::from(rng.gen::<f64>() < p1);
        let record = self.collapse(q, outcome)?;
        Ok(MeasurementRecord { probability: if outcome == 1 { p1 } else { 1.0 - p1 }, ..record })
    }

    /// Projects `q` onto `outcome`. Fails if that outcome has zero probability.
    pub fn collapse(&mut self, q: Qubit, outcome: u8) -> Result<MeasurementRecord> {
        let mask = 1usize << self.position(q)?;
        let keep = |i: usize| (i & mask != 0) == (outcome == 1);
        let p: f64 = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, a)| a.norm_sqr())
            .sum();
        if p <= 0.0 {
            return Err(Error::BadArgument(format!("outcome {outcome} on {q} has zero probability")));
        }
        let scale = p.sqrt().recip();
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if keep(i) {
                *a *= scale;
            } else {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        Ok(MeasurementRecord { label: q, outcome, probability: p })
    }

    /// Full Z-basis distribution; index bit `j` belongs to `labels()[j]`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(Complex64::norm_sqr).collect()
    }

    /// Probability of a joint Z outcome given as (label, bit) pairs.
    pub fn outcome_probability(&self, bits: &[(Qubit, u8)]) -> Result<f64> {
        let mut mask = 0usize;
        let mut want = 0usize;
        for &(q, b) in bits {
            let m = 1usize << self.position(q)?;
            mask |= m;
            if b == 1 {
                want |= m;
            }
        }
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask == want)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Partial trace onto `keep`; the result is indexed little-endian in the
    /// order of `keep`.
    pub fn reduced_density_matrix(&self, keep: &[Qubit]) -> Result<DensityMatrix> {
        let positions = keep.iter().map(|&q| self.position(q)).collect::<Result<Vec<_>>>()?;
        let k = positions.len();
        let dim = 1usize << k;
        let mask: usize = positions.iter().map(|p| 1usize << p).sum();
        let sub_index = |i: usize| -> usize {
            positions
                .iter()
                .enumerate()
                .map(|(j, p)| ((i >> p) & 1) << j)
                .sum()
        };
        let mut rho = DensityMatrix::zeros(dim, dim);
        // Group amplitudes by environment configuration.
        let mut by_env: std::collections::BTreeMap<usize, Vec<(usize, Complex64)>> = Default::default();
        for (i, a) in self.amplitudes.iter().enumerate() {
            if a.norm_sqr() == 0.0 {
                continue;
            }
            by_env.entry(i & !mask).or_default().push((sub_index(i), *a));
        }
        for entries in by_env.values() {
            for &(r, ar) in entries {
                for &(c, ac) in entries {
                    rho[(r, c)] += ar * ac.conj();
                }
            }
        }
        Ok(rho)
    }

    /// Copy with qubits laid out in `order` (a permutation of the labels).
    pub fn reordered(&self, order: &[Qubit]) -> Result<StateVector> {
        if order.len() != self.labels.len() {
            return Err(Error::LabelMismatch);
        }
        let src_pos = order
            .iter()
            .map(|&q| self.position(q).map_err(|_| Error::LabelMismatch))
            .collect::<Result<Vec<_>>>()?;
        let mut amps = vec![Complex64::new(0.0, 0.0); self.amplitudes.len()];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let j: usize = src_pos.iter().enumerate().map(|(new, &old)| ((i >> old) & 1) << new).sum();
            amps[j] = *a;
        }
        Ok(StateVector { amplitudes: amps, labels: order.to_vec() })
    }

    /// Renames labels in place; amplitudes are untouched.
    pub fn relabel(&mut self, map: impl Fn(Qubit) -> Qubit) -> Result<()> {
        let labels: Vec<Qubit> = self.labels.iter().map(|&q| map(q)).collect();
        Self::check_labels(&labels)?;
        self.labels = labels;
        Ok(())
    }

    /// `|<a|b>|^2` after putting `other` into this state's label order.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        let b = other.reordered(&self.labels)?;
        let inner: Complex64 = self.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| x.conj() * y).sum();
        Ok(inner.norm_sqr().min(1.0))
    }

    /// Kronecker product; `self` occupies the low positions.
    pub fn tensor(&self, other: &StateVector) -> Result<StateVector> {
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Self::check_labels(&labels)?;
        let lo = self.amplitudes.len();
        let mut amps = vec![Complex64::new(0.0, 0.0); lo * other.amplitudes.len()];
        for (j, b) in other.amplitudes.iter().enumerate() {
            for (i, a) in self.amplitudes.iter().enumerate() {
                amps[j * lo + i] = a * b;
            }
        }
        Ok(StateVector { amplitudes: amps, labels })
    }
}

/// Phase-insensitive overlap; free-function form of [`StateVector::fidelity`].
pub fn fidelity_up_to_global_phase(a: &StateVector, b: &StateVector) -> Result<f64> {
    a.fidelity(b)
}

/// Dense unitary of a gate sequence over `labels`, built column by column
/// through the statevector path.
pub fn circuit_unitary<'a>(labels: &[Qubit], gates: impl IntoIterator<Item = &'a Gate> + Clone) -> Result<DMatrix<Complex64>> {
    let dim = 1usize << labels.len();
    let mut u = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[col] = Complex64::new(1.0, 0.0);
        let mut s = StateVector { amplitudes: amps, labels: labels.to_vec() };
        s.apply_all(gates.clone())?;
        for (row, a) in s.amplitudes.iter().enumerate() {
            u[(row, col)] = *a;
        }
    }
    Ok(u)
}

/// True when `a = e^{i phi} b` within `tol` (max-entry metric).
pub fn equal_up_to_phase(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, tol: f64) -> bool {
    if a.shape() != b.shape() {
        return false;
    }
    let Some((idx, _)) = b.iter().enumerate().max_by(|x, y| x.1.norm().total_cmp(&y.1.norm())) else {
        return true;
    };
    if b[idx].norm() < tol {
        return a.iter().all(|x| x.norm() < tol);
    }
    let phase = a[idx] / b[idx];
    if (phase.norm() - 1.0).abs() > tol {
        return false;
    }
    a.iter().zip(b.iter()).all(|(x, y)| (x - phase * y).norm() < tol)
}
