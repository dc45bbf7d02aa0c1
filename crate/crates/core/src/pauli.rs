//! Phase-free Pauli strings on up to 32 qubits, stored as x/z bit masks.
//!
//! Qubit 0 is the most significant bit of a basis index, matching
//! [`crate::linalg::local`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, Mat2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn matrix(self) -> Mat2 {
        match self {
            Pauli::I => Mat2::identity(),
            Pauli::X => linalg::pauli_x(),
            Pauli::Y => linalg::pauli_y(),
            Pauli::Z => linalg::pauli_z(),
        }
    }

    pub fn letter(self) -> char {
        ['I', 'X', 'Y', 'Z'][self.index()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliString {
    n: usize,
    x: u32,
    z: u32,
}

impl PauliString {
    pub const MAX_QUBITS: usize = 32;

    pub fn identity(n: usize) -> Self {
        assert!(n <= Self::MAX_QUBITS, "at most 32 qubits");
        Self { n, x: 0, z: 0 }
    }

    pub fn from_masks(n: usize, x: u32, z: u32) -> Self {
        assert!(n <= Self::MAX_QUBITS, "at most 32 qubits");
        let keep = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
        Self { n, x: x & keep, z: z & keep }
    }

    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut s = Self::identity(n);
        s.set(qubit, p);
        s
    }

    fn mask(&self, qubit: usize) -> u32 {
        assert!(qubit < self.n, "qubit {qubit} out of range for {} qubits", self.n);
        1 << (self.n - 1 - qubit)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn x_mask(&self) -> u32 {
        self.x
    }

    pub fn z_mask(&self) -> u32 {
        self.z
    }

    pub fn get(&self, qubit: usize) -> Pauli {
        let m = self.mask(qubit);
        Pauli::from_bits(self.x & m != 0, self.z & m != 0)
    }

    pub fn set(&mut self, qubit: usize, p: Pauli) {
        let m = self.mask(qubit);
        let (x, z) = p.bits();
        self.x = if x { self.x | m } else { self.x & !m };
        self.z = if z { self.z | m } else { self.z & !m };
    }

    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// Product up to phase.
    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.n, other.n, "Pauli strings on different qubit counts");
        Self { n: self.n, x: self.x ^ other.x, z: self.z ^ other.z }
    }

    /// Dense matrix with Y = iXZ on each site (Hermitian, no extra phase).
    pub fn matrix(&self) -> CMat {
        (0..self.n).fold(linalg::identity(1), |acc, q| {
            linalg::kron(&acc, &linalg::to_dyn(&self.get(q).matrix()))
        })
    }

    /// Anticommutation bits against a list of generators; generator `k` is
    /// bit `k` of the result.
    pub fn syndrome(&self, generators: &[PauliString]) -> usize {
        generators
            .iter()
            .enumerate()
            .filter(|(_, g)| !self.commutes_with(g))
            .fold(0, |acc, (k, _)| acc | 1 << k)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        (0..self.n).try_for_each(|q| write!(f, "{}", self.get(q).letter()))
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let letters: Vec<char> = s.trim().chars().collect();
        if letters.is_empty() || letters.len() > Self::MAX_QUBITS {
            return Err(Error::Parse(format!("Pauli string `{s}` must have 1..=32 letters")));
        }
        let mut out = Self::identity(letters.len());
        for (q, ch) in letters.into_iter().enumerate() {
            let p = match ch {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(Error::Parse(format!("bad Pauli letter `{other}` in `{s}`"))),
            };
            out.set(q, p);
        }
        Ok(out)
    }
}
