use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Opaque qubit label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Qubit(pub u32);

impl fmt::Display for Qubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

impl From<u32> for Qubit {
    fn from(v: u32) -> Self {
        Qubit(v)
    }
}

/// Gate kinds understood by the simulator. Rotation angles are in radians.
///
/// `I` is a one-qubit identity used as a scheduling marker (client requests
/// between the halves of a trap pair); it never changes the state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateKind {
    I,
    H,
    X,
    Y,
    Z,
    S,
    T,
    Rx(f64),
    Ry(f64),
    Rz(f64),
    Cnot,
    Cz,
    Ccz,
    Ccx,
    Swap,
    Rzz(f64),
}

impl GateKind {
    pub fn arity(&self) -> usize {
        use GateKind::*;
        match self {
            I | H | X | Y | Z | S | T | Rx(_) | Ry(_) | Rz(_) => 1,
            Cnot | Cz | Swap | Rzz(_) => 2,
            Ccz | Ccx => 3,
        }
    }

    pub fn name(&self) -> &'static str {
        use GateKind::*;
        match self {
            I => "I",
            H => "H",
            X => "X",
            Y => "Y",
            Z => "Z",
            S => "S",
            T => "T",
            Rx(_) => "RX",
            Ry(_) => "RY",
            Rz(_) => "RZ",
            Cnot => "CNOT",
            Cz => "CZ",
            Ccz => "CCZ",
            Ccx => "CCX",
            Swap => "SWAP",
            Rzz(_) => "RZZ",
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            GateKind::Rx(t) | GateKind::Ry(t) | GateKind::Rz(t) | GateKind::Rzz(t) => Some(t),
            _ => None,
        }
    }

    /// Same kind with a different angle; identity for fixed gates.
    pub fn with_angle(&self, theta: f64) -> GateKind {
        match self {
            GateKind::Rx(_) => GateKind::Rx(theta),
            GateKind::Ry(_) => GateKind::Ry(theta),
            GateKind::Rz(_) => GateKind::Rz(theta),
            GateKind::Rzz(_) => GateKind::Rzz(theta),
            other => *other,
        }
    }

    pub fn from_parts(name: &str, params: &[f64]) -> Result<GateKind> {
        use GateKind::*;
        let angle = || -> Result<f64> {
            match params {
                [t] if t.is_finite() => Ok(*t),
                _ => Err(Error::BadGate(format!("{name} takes exactly one finite angle"))),
            }
        };
        let fixed = |k: GateKind| -> Result<GateKind> {
            if params.is_empty() {
                Ok(k)
            } else {
                Err(Error::BadGate(format!("{name} takes no parameters")))
            }
        };
        match name.to_ascii_uppercase().as_str() {
            "I" | "ID" => fixed(I),
            "H" => fixed(H),
            "X" => fixed(X),
            "Y" => fixed(Y),
            "Z" => fixed(Z),
            "S" => fixed(S),
            "T" => fixed(T),
            "RX" => Ok(Rx(angle()?)),
            "RY" => Ok(Ry(angle()?)),
            "RZ" => Ok(Rz(angle()?)),
            "CNOT" | "CX" => fixed(Cnot),
            "CZ" => fixed(Cz),
            "CCZ" => fixed(Ccz),
            "CCX" | "TOFFOLI" => fixed(Ccx),
            "SWAP" => fixed(Swap),
            "RZZ" => Ok(Rzz(angle()?)),
            other => Err(Error::BadGate(format!("unknown gate kind {other}"))),
        }
    }

    /// Dense matrix, row-major, in the little-endian basis of the target list:
    /// basis index `i = sum_j bit_j << j` where bit `j` belongs to target `j`.
    pub fn matrix(&self) -> Vec<Complex64> {
        use GateKind::*;
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        match *self {
            I => vec![o, z, z, o],
            H => {
                let h = c(FRAC_1_SQRT_2, 0.0);
                vec![h, h, h, -h]
            }
            X => vec![z, o, o, z],
            Y => vec![z, c(0.0, -1.0), c(0.0, 1.0), z],
            Z => vec![o, z, z, -o],
            S => vec![o, z, z, c(0.0, 1.0)],
            T => vec![o, z, z, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)],
            Rx(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                vec![c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)]
            }
            Ry(t) => {
                let (s, co) = (t / 2.0).sin_cos();
                vec![c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)]
            }
            Rz(t) => vec![
                Complex64::from_polar(1.0, -t / 2.0),
                z,
                z,
                Complex64::from_polar(1.0, t / 2.0),
            ],
            Cnot => permutation(4, |i| if i & 1 == 1 { i ^ 2 } else { i }),
            Swap => permutation(4, |i| ((i & 1) << 1) | ((i >> 1) & 1)),
            Ccx => permutation(8, |i| if i & 3 == 3 { i ^ 4 } else { i }),
            Cz => diagonal(4, |i| if i == 3 { -o } else { o }),
            Ccz => diagonal(8, |i| if i == 7 { -o } else { o }),
            Rzz(t) => diagonal(4, |i| {
                let parity = (i ^ (i >> 1)) & 1;
                Complex64::from_polar(1.0, if parity == 0 { -t / 2.0 } else { t / 2.0 })
            }),
        }
    }

    /// Diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        use GateKind::*;
        matches!(self, I | Z | S | T | Rz(_) | Cz | Ccz | Rzz(_))
    }
}

fn permutation(dim: usize, f: impl Fn(usize) -> usize) -> Vec<Complex64> {
    let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
    for col in 0..dim {
        m[f(col) * dim + col] = Complex64::new(1.0, 0.0);
    }
    m
}

fn diagonal(dim: usize, f: impl Fn(usize) -> Complex64) -> Vec<Complex64> {
    let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        m[i * dim + i] = f(i);
    }
    m
}

/// A gate kind bound to ordered target labels. For controlled gates the
/// controls come first and the target last.
#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub targets: Vec<Qubit>,
}

impl Gate {
    pub fn new(kind: GateKind, targets: impl IntoIterator<Item = impl Into<Qubit>>) -> Result<Gate> {
        let gate = Gate {
            kind,
            targets: targets.into_iter().map(Into::into).collect(),
        };
        gate.validate()?;
        Ok(gate)
    }

    pub fn validate(&self) -> Result<()> {
        if self.targets.len() != self.kind.arity() {
            return Err(Error::BadGate(format!(
                "{} expects {} targets, got {}",
                self.kind.name(),
                self.kind.arity(),
                self.targets.len()
            )));
        }
        for (i, q) in self.targets.iter().enumerate() {
            if self.targets[..i].contains(q) {
                return Err(Error::BadGate(format!("{} repeats target {q}", self.kind.name())));
            }
        }
        if let Some(t) = self.kind.angle() {
            if !t.is_finite() {
                return Err(Error::BadGate(format!("{} angle is not finite", self.kind.name())));
            }
        }
        Ok(())
    }

    pub fn arity(&self) -> usize {
        self.targets.len()
    }

    pub fn touches(&self, q: Qubit) -> bool {
        self.targets.contains(&q)
    }

    pub fn h(q: impl Into<Qubit>) -> Gate {
        Gate::one(GateKind::H, q)
    }
    pub fn x(q: impl Into<Qubit>) -> Gate {
        Gate::one(GateKind::X, q)
    }
    pub fn z(q: impl Into<Qubit>) -> Gate {
        Gate::one(GateKind::Z, q)
    }
    pub fn rx(theta: f64, q: impl Into<Qubit>) -> Gate {
        Gate::one(GateKind::Rx(theta), q)
    }
    pub fn ry(theta: f64, q: impl Into<Qubit>) -> Gate {
        Gate::one(GateKind::Ry(theta), q)
    }
    pub fn rz(theta: f64, q: impl Into<Qubit>) -> Gate {
        Gate::one(GateKind::Rz(theta), q)
    }
    pub fn cnot(control: impl Into<Qubit>, target: impl Into<Qubit>) -> Gate {
        Gate { kind: GateKind::Cnot, targets: vec![control.into(), target.into()] }
    }
    pub fn cz(a: impl Into<Qubit>, b: impl Into<Qubit>) -> Gate {
        Gate { kind: GateKind::Cz, targets: vec![a.into(), b.into()] }
    }
    pub fn swap(a: impl Into<Qubit>, b: impl Into<Qubit>) -> Gate {
        Gate { kind: GateKind::Swap, targets: vec![a.into(), b.into()] }
    }
    pub fn rzz(theta: f64, a: impl Into<Qubit>, b: impl Into<Qubit>) -> Gate {
        Gate { kind: GateKind::Rzz(theta), targets: vec![a.into(), b.into()] }
    }
    pub fn ccz(a: impl Into<Qubit>, b: impl Into<Qubit>, c: impl Into<Qubit>) -> Gate {
        Gate { kind: GateKind::Ccz, targets: vec![a.into(), b.into(), c.into()] }
    }
    pub fn ccx(a: impl Into<Qubit>, b: impl Into<Qubit>, target: impl Into<Qubit>) -> Gate {
        Gate { kind: GateKind::Ccx, targets: vec![a.into(), b.into(), target.into()] }
    }

    fn one(kind: GateKind, q: impl Into<Qubit>) -> Gate {
        Gate { kind, targets: vec![q.into()] }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind.name())?;
        if let Some(t) = self.kind.angle() {
            write!(f, "({t})")?;
        }
        let names: Vec<String> = self.targets.iter().map(ToString::to_string).collect();
        write!(f, "[{}]", names.join(","))
    }
}
