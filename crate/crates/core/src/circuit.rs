//! Primitive Clifford gates: Hadamard, bit flip, sign flip, controlled-not
//! and controlled-sign.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::linalg::{self, local, CMat, CVec};
use crate::pauli::PauliString;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    X(usize),
    Z(usize),
    Cnot { control: usize, target: usize },
    Cz(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::Z(q) => vec![q],
            Gate::Cnot { control, target } => vec![control, target],
            Gate::Cz(a, b) => vec![a, b],
        }
    }

    /// Same gate with qubit `q` relabelled to `map(q)`.
    pub fn relabel(&self, map: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::H(q) => Gate::H(map(q)),
            Gate::X(q) => Gate::X(map(q)),
            Gate::Z(q) => Gate::Z(map(q)),
            Gate::Cnot { control, target } => Gate::Cnot { control: map(control), target: map(target) },
            Gate::Cz(a, b) => Gate::Cz(map(a), map(b)),
        }
    }

    /// `rho <- G rho G^†` on an `n`-qubit operator.
    pub fn conjugate(&self, rho: &mut CMat, n: usize) {
        match *self {
            Gate::H(q) => local::conjugate_1q(rho, n, q, &linalg::hadamard()),
            Gate::X(q) => {
                let m = 1 << (n - 1 - q);
                local::permute(rho, |b| b ^ m);
            }
            Gate::Z(q) => {
                let m = 1 << (n - 1 - q);
                local::diagonal_sign(rho, |b| b & m != 0);
            }
            Gate::Cnot { control, target } => local::cnot(rho, n, control, target),
            Gate::Cz(a, b) => local::cz(rho, n, a, b),
        }
    }

    pub fn apply_to_state(&self, psi: &mut CVec, n: usize) {
        let mut col = CMat::from_column_slice(psi.len(), 1, psi.as_slice());
        let mask = |q: usize| 1usize << (n - 1 - q);
        match *self {
            Gate::H(q) => local::left_1q(&mut col, n, q, &linalg::hadamard()),
            Gate::X(q) => local::left_1q(&mut col, n, q, &linalg::pauli_x()),
            Gate::Z(q) => local::left_1q(&mut col, n, q, &linalg::pauli_z()),
            Gate::Cnot { control, target } => {
                let (mc, mt) = (mask(control), mask(target));
                let old = col.clone();
                for b in 0..psi.len() {
                    let src = if b & mc != 0 { b ^ mt } else { b };
                    col[(b, 0)] = old[(src, 0)];
                }
            }
            Gate::Cz(a, b) => {
                let (ma, mb) = (mask(a), mask(b));
                for i in 0..psi.len() {
                    if i & ma != 0 && i & mb != 0 {
                        col[(i, 0)] = -col[(i, 0)];
                    }
                }
            }
        }
        psi.copy_from_slice(col.as_slice());
    }

    /// Frame update `P <- G P G^†`, up to phase.
    pub fn propagate(&self, frame: &mut PauliString) {
        let n = frame.num_qubits();
        let bit = |q: usize| 1u32 << (n - 1 - q);
        let (mut x, mut z) = (frame.x_mask(), frame.z_mask());
        match *self {
            Gate::H(q) => {
                let m = bit(q);
                let (xb, zb) = (x & m, z & m);
                x = (x & !m) | zb;
                z = (z & !m) | xb;
            }
            Gate::X(_) | Gate::Z(_) => {}
            Gate::Cnot { control, target } => {
                let (mc, mt) = (bit(control), bit(target));
                if x & mc != 0 {
                    x ^= mt;
                }
                if z & mt != 0 {
                    z ^= mc;
                }
            }
            Gate::Cz(a, b) => {
                let (ma, mb) = (bit(a), bit(b));
                if x & ma != 0 {
                    z ^= mb;
                }
                if x & mb != 0 {
                    z ^= ma;
                }
            }
        }
        *frame = PauliString::from_masks(n, x, z);
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gate::H(q) => write!(f, "H({q})"),
            Gate::X(q) => write!(f, "X({q})"),
            Gate::Z(q) => write!(f, "Z({q})"),
            Gate::Cnot { control, target } => write!(f, "CX({control}->{target})"),
            Gate::Cz(a, b) => write!(f, "CZ({a},{b})"),
        }
    }
}

/// Dense unitary of a gate sequence (first gate applied first).
pub fn unitary(gates: &[Gate], n: usize) -> CMat {
    let dim = 1 << n;
    let mut u = CMat::zeros(dim, dim);
    for col in 0..dim {
        let mut psi = linalg::basis(dim, col);
        for g in gates {
            g.apply_to_state(&mut psi, n);
        }
        u.set_column(col, &psi);
    }
    u
}

/// Inverse of a sequence of self-inverse gates.
pub fn inverse(gates: &[Gate]) -> Vec<Gate> {
    gates.iter().rev().copied().collect()
}

pub fn propagate(gates: &[Gate], frame: &mut PauliString) {
    for g in gates {
        g.propagate(frame);
    }
}
