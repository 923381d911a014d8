use std::collections::VecDeque;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::sim::{Gate, Qubit, StateVector};

/// One-time-pad key `(a, b)` for a single qubit: the encryption operator is
/// `X^a Z^b`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PadKey {
    pub a: u8,
    pub b: u8,
}

impl PadKey {
    pub const ZERO: PadKey = PadKey { a: 0, b: 0 };

    pub fn new(a: u8, b: u8) -> Self {
        Self { a: a & 1, b: b & 1 }
    }

    pub fn from_bits(bits: [u8; 2]) -> Self {
        Self::new(bits[0], bits[1])
    }

    pub fn all() -> [PadKey; 4] {
        [PadKey::new(0, 0), PadKey::new(1, 0), PadKey::new(0, 1), PadKey::new(1, 1)]
    }

    pub fn is_zero(self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub(crate) fn xor(self, other: PadKey) -> PadKey {
        PadKey { a: self.a ^ other.a, b: self.b ^ other.b }
    }
}

/// Applies `X^a Z^b` to `label`: `Z^b` first, then `X^a`.
pub(crate) fn apply_pad(state: &mut StateVector, label: Qubit, key: PadKey) -> Result<()> {
    state.position(label)?;
    if key.b == 1 {
        state.apply(&Gate::z(label))?;
    }
    if key.a == 1 {
        state.apply(&Gate::x(label))?;
    }
    Ok(())
}

/// Applies the inverse pad `Z^b X^a`: `X^a` first, then `Z^b`.
pub(crate) fn remove_pad(state: &mut StateVector, label: Qubit, key: PadKey) -> Result<()> {
    state.position(label)?;
    if key.a == 1 {
        state.apply(&Gate::x(label))?;
    }
    if key.b == 1 {
        state.apply(&Gate::z(label))?;
    }
    Ok(())
}

/// Bits produced by the literal key-generation routine.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KeygenOutput {
    pub bits: Vec<u8>,
    pub rounds: usize,
}

/// Generates `bits_needed` random bits by repeatedly preparing `|+>` in each
/// of `free_slots` spare client qubits and measuring them.
pub fn protocol1_keygen(free_slots: usize, bits_needed: usize, rng: &mut impl Rng) -> Result<KeygenOutput> {
    if free_slots == 0 {
        return Err(Error::NoCapacity);
    }
    let labels: Vec<Qubit> = (0..free_slots as u32).map(Qubit).collect();
    let mut bits = Vec::with_capacity(bits_needed);
    let mut rounds = 0;
    while bits.len() < bits_needed {
        rounds += 1;
        let mut slots = StateVector::zero(labels.iter().copied())?;
        for &q in &labels {
            slots.apply(&Gate::h(q))?;
        }
        for &q in &labels {
            if bits.len() == bits_needed {
                break;
            }
            bits.push(slots.measure_z(q, rng)?.outcome);
        }
    }
    Ok(KeygenOutput { bits, rounds })
}

/// Where pad bits come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeySourceMode {
    /// Measure `|+>` states in free client slots as keys are needed.
    Protocol1Literal,
    /// Bits generated ahead of the run (by the literal routine during idle
    /// time) and consumed from a buffer.
    PregeneratedPool,
    /// Bits supplied by a party outside the servers, e.g. a key dealer.
    ExternalClassical,
}

pub struct KeySource {
    mode: KeySourceMode,
    rng: SimRng,
    pool: VecDeque<u8>,
    bits_drawn: usize,
    literal_rounds: usize,
}

impl KeySource {
    pub fn new(mode: KeySourceMode, rng: SimRng) -> Self {
        Self { mode, rng, pool: VecDeque::new(), bits_drawn: 0, literal_rounds: 0 }
    }

    pub fn mode(&self) -> KeySourceMode {
        self.mode
    }

    pub fn bits_drawn(&self) -> usize {
        self.bits_drawn
    }

    pub fn literal_rounds(&self) -> usize {
        self.literal_rounds
    }

    /// Fills the pool with `bits` bits using one dedicated slot.
    pub fn prefill(&mut self, bits: usize) -> Result<()> {
        let out = protocol1_keygen(1, bits, &mut self.rng)?;
        self.pool.extend(out.bits);
        Ok(())
    }

    /// Draws one key. In literal mode `free_slots` spare qubits are needed.
    pub fn draw(&mut self, free_slots: usize) -> Result<PadKey> {
        let (a, b) = match self.mode {
            KeySourceMode::Protocol1Literal => {
                let out = protocol1_keygen(free_slots, 2, &mut self.rng)?;
                self.literal_rounds += out.rounds;
                (out.bits[0], out.bits[1])
            }
            KeySourceMode::PregeneratedPool => {
                if self.pool.len() < 2 {
                    self.prefill(64)?;
                }
                (self.pool.pop_front().unwrap_or(0), self.pool.pop_front().unwrap_or(0))
            }
            KeySourceMode::ExternalClassical => (self.rng.gen_range(0..2u8), self.rng.gen_range(0..2u8)),
        };
        self.bits_drawn += 2;
        Ok(PadKey::new(a, b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Streams;

    #[test]
    fn keygen_rounds_and_counts() {
        let mut rng = Streams::new(1).stream(0);
        let out = protocol1_keygen(2, 4, &mut rng).unwrap();
        assert_eq!(out.rounds, 2);
        assert_eq!(out.bits.len(), 4);
        assert!(matches!(protocol1_keygen(0, 4, &mut rng), Err(Error::NoCapacity)));
    }

    #[test]
    fn keygen_is_fair_and_replayable() {
        let out = protocol1_keygen(3, 10_000, &mut Streams::new(2).stream(0)).unwrap();
        let ones = out.bits.iter().filter(|&&b| b == 1).count() as f64 / 1e4;
        assert!((0.48..=0.52).contains(&ones), "{ones}");
        let again = protocol1_keygen(3, 10_000, &mut Streams::new(2).stream(0)).unwrap();
        assert_eq!(out, again);
    }

    #[test]
    fn key_sources_draw_bits() {
        for mode in [KeySourceMode::Protocol1Literal, KeySourceMode::PregeneratedPool, KeySourceMode::ExternalClassical] {
            let mut src = KeySource::new(mode, Streams::new(3).stream(0));
            let keys: Vec<PadKey> = (0..400).map(|_| src.draw(1).unwrap()).collect();
            assert_eq!(src.bits_drawn(), 800);
            for k in PadKey::all() {
                assert!(keys.contains(&k));
            }
        }
        let mut lit = KeySource::new(KeySourceMode::Protocol1Literal, Streams::new(3).stream(0));
        assert!(matches!(lit.draw(0), Err(Error::NoCapacity)));
    }
}
