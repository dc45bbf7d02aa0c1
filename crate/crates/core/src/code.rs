//! Stabilizer codes with encoder, recovery and decoder.
//!
//! Two codes ship: the five-qubit perfect code and a three-qubit bit-flip
//! code used as a cheap test oracle. The logical basis is
//! `|0_L> = P_S |0...0> / |P_S |0...0>|` with `P_S` the projector onto the
//! stabilized subspace, and `|1_L> = X_L |0_L>`.
//!
//! The encoder takes the protected qubit on qubit 0 and ancillas `|0>` on
//! qubits `1..l`. Ideal recovery has one Kraus term per syndrome `s`,
//! `C_s Pi_s`, where `Pi_s` projects onto syndrome `s` and `C_s` is the table
//! correction; it leaves every output in the code space. The ideal decoder is
//! recovery followed by the inverse encoder, so it always resets the ancillas.

use serde::Serialize;

use crate::amplitude;
use crate::circuit::{self, Gate};
use crate::error::{Error, Result};
use crate::linalg::{self, c, local, CMat, CVec, Mat2};
use crate::oper::{GeneralizedOperator, SubspaceIsometry};
use crate::pauli::{Pauli, PauliString};

/// One stabilizer-measurement round on `l + 1` qubits, ancilla last.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SyndromeRound {
    pub generator: usize,
    pub gates: Vec<Gate>,
}

#[derive(Debug, Clone)]
pub struct CodeSpec {
    name: String,
    length: usize,
    correct_errors: usize,
    stabilizers: Vec<PauliString>,
    logical_x: PauliString,
    logical_z: PauliString,
    logical_zero: CVec,
    logical_one: CVec,
    encoder_circuit: Vec<Gate>,
    encoder: CMat,
    projectors: Vec<CMat>,
    syndrome_table: Vec<PauliString>,
    decoder_table: Vec<Pauli>,
    recovery: GeneralizedOperator,
    decoder: GeneralizedOperator,
    rounds: Vec<SyndromeRound>,
    quantum: bool,
}

pub struct CodeBuilder {
    pub name: String,
    pub correct_errors: usize,
    pub stabilizers: Vec<PauliString>,
    pub logical_x: PauliString,
    pub logical_z: PauliString,
    pub encoder_circuit: Vec<Gate>,
    /// Errors the syndrome table must correct, in priority order.
    pub correctable: Vec<PauliString>,
    pub quantum: bool,
}

impl CodeBuilder {
    pub fn build(self) -> Result<CodeSpec> {
        let l = self.logical_x.num_qubits();
        if l < 2 || self.stabilizers.len() != l - 1 {
            return Err(Error::InvalidArgument(format!(
                "a one-qubit code of length {l} needs {} generators, got {}",
                l.saturating_sub(1),
                self.stabilizers.len()
            )));
        }
        for g in &self.stabilizers {
            if g.num_qubits() != l {
                return Err(Error::InvalidArgument(format!("generator {g} has wrong length")));
            }
            if self.stabilizers.iter().any(|h| !g.commutes_with(h))
                || !g.commutes_with(&self.logical_x)
                || !g.commutes_with(&self.logical_z)
            {
                return Err(Error::InvalidArgument(format!("generator {g} breaks commutation")));
            }
        }
        if self.logical_x.commutes_with(&self.logical_z) {
            return Err(Error::InvalidArgument("logical X and Z must anticommute".into()));
        }
        let dim = 1usize << l;
        let id = linalg::identity(dim);
        let half = c(0.5, 0.0);

        let syndromes = 1usize << self.stabilizers.len();
        let projectors: Vec<CMat> = (0..syndromes)
            .map(|s| {
                self.stabilizers.iter().enumerate().fold(id.clone(), |acc, (k, g)| {
                    let sign = if s >> k & 1 == 1 { -1.0 } else { 1.0 };
                    acc * (&id + g.matrix() * c(sign, 0.0)) * half
                })
            })
            .collect();

        let zero_raw = &projectors[0] * linalg::basis(dim, 0);
        let norm = zero_raw.norm();
        if norm < 1e-6 {
            return Err(Error::InvalidArgument("|0...0> has no code-space component".into()));
        }
        let logical_zero = zero_raw / c(norm, 0.0);
        let logical_one = self.logical_x.matrix() * &logical_zero;

        let encoder = circuit::unitary(&self.encoder_circuit, l);
        let ancilla_block = 1usize << (l - 1);
        for (i, target) in [&logical_zero, &logical_one].into_iter().enumerate() {
            let image = encoder.column(i * ancilla_block).clone_owned();
            let dev = (image - target).norm();
            if dev > 1e-12 {
                return Err(Error::InvalidArgument(format!(
                    "encoder maps |{i}>|0...0> to a state {dev:.3e} away from |{i}_L>"
                )));
            }
        }

        let mut table: Vec<Option<PauliString>> = vec![None; syndromes];
        for err in &self.correctable {
            let s = err.syndrome(&self.stabilizers);
            match table[s] {
                None => table[s] = Some(*err),
                Some(prev) if prev == *err => {}
                Some(prev) => {
                    return Err(Error::InvalidArgument(format!(
                        "errors {prev} and {err} share syndrome {s}"
                    )))
                }
            }
        }
        let syndrome_table: Vec<PauliString> =
            table.into_iter().map(|t| t.unwrap_or(PauliString::identity(l))).collect();

        let inverse_encoder = circuit::inverse(&self.encoder_circuit);
        let mut decoder_table: Vec<Option<Pauli>> = vec![None; ancilla_block];
        for corr in &syndrome_table {
            let mut frame = *corr;
            circuit::propagate(&inverse_encoder, &mut frame);
            let t = (frame.x_mask() as usize) & (ancilla_block - 1);
            let q0 = frame.get(0);
            match decoder_table[t] {
                None => decoder_table[t] = Some(q0),
                Some(prev) if prev == q0 => {}
                Some(_) => {
                    return Err(Error::InvalidArgument(format!(
                        "ancilla pattern {t} is ambiguous after decoding"
                    )))
                }
            }
        }
        let decoder_table: Vec<Pauli> = decoder_table.into_iter().map(|p| p.unwrap_or(Pauli::I)).collect();

        let recovery_terms: Vec<CMat> = syndrome_table
            .iter()
            .zip(&projectors)
            .map(|(corr, proj)| corr.matrix() * proj)
            .collect();
        let decoder_terms: Vec<CMat> = recovery_terms.iter().map(|k| encoder.adjoint() * k).collect();
        let recovery = GeneralizedOperator::from_kraus_with_dims(recovery_terms, dim, dim)?;
        let decoder = GeneralizedOperator::from_kraus_with_dims(decoder_terms, dim, dim)?;

        let ancilla = l;
        let rounds = self
            .stabilizers
            .iter()
            .enumerate()
            .map(|(k, g)| {
                let mut gates = vec![Gate::H(ancilla)];
                for q in 0..l {
                    match g.get(q) {
                        Pauli::I => {}
                        Pauli::X => gates.push(Gate::Cnot { control: ancilla, target: q }),
                        Pauli::Z => gates.push(Gate::Cz(ancilla, q)),
                        Pauli::Y => {
                            return Err(Error::InvalidArgument(format!(
                                "generator {g} has a Y factor; syndrome circuits need X/Z-only generators"
                            )))
                        }
                    }
                }
                gates.push(Gate::H(ancilla));
                Ok(SyndromeRound { generator: k, gates })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(CodeSpec {
            name: self.name,
            length: l,
            correct_errors: self.correct_errors,
            stabilizers: self.stabilizers,
            logical_x: self.logical_x,
            logical_z: self.logical_z,
            logical_zero,
            logical_one,
            encoder_circuit: self.encoder_circuit,
            encoder,
            projectors,
            syndrome_table,
            decoder_table,
            recovery,
            decoder,
            rounds,
            quantum: self.quantum,
        })
    }
}

fn paulis(strings: &[&str]) -> Vec<PauliString> {
    strings.iter().map(|s| s.parse().expect("valid Pauli literal")).collect()
}

fn weight_at_most_one(l: usize, letters: &[Pauli]) -> Vec<PauliString> {
    let mut out = vec![PauliString::identity(l)];
    for q in 0..l {
        for &p in letters {
            out.push(PauliString::single(l, q, p));
        }
    }
    out
}

/// The five-qubit perfect code with cyclic generators `XZZXI`, `IXZZX`,
/// `XIXZZ`, `ZXIXZ`, logical operators `X_L = XXXXX`, `Z_L = ZZZZZ`.
pub fn five_qubit_code() -> CodeSpec {
    use Gate::*;
    let encoder_circuit = vec![
        Z(0),
        H(1),
        H(2),
        H(3),
        H(4),
        Cnot { control: 1, target: 0 },
        Cz(0, 3),
        Cnot { control: 4, target: 0 },
        Cz(0, 1),
        Cnot { control: 2, target: 0 },
        Cz(0, 4),
        Cnot { control: 3, target: 4 },
        Z(3),
    ];
    CodeBuilder {
        name: "five_qubit".into(),
        correct_errors: 1,
        stabilizers: paulis(&["XZZXI", "IXZZX", "XIXZZ", "ZXIXZ"]),
        logical_x: "XXXXX".parse().unwrap(),
        logical_z: "ZZZZZ".parse().unwrap(),
        encoder_circuit,
        correctable: weight_at_most_one(5, &[Pauli::X, Pauli::Y, Pauli::Z]),
        quantum: true,
    }
    .build()
    .expect("five-qubit code tables are consistent")
}

/// Three-qubit repetition code. Corrects a single bit flip only, so it is
/// flagged as not a quantum code.
pub fn bit_flip_code() -> CodeSpec {
    CodeBuilder {
        name: "bit_flip".into(),
        correct_errors: 1,
        stabilizers: paulis(&["ZZI", "IZZ"]),
        logical_x: "XXX".parse().unwrap(),
        logical_z: "ZII".parse().unwrap(),
        encoder_circuit: vec![Gate::Cnot { control: 0, target: 1 }, Gate::Cnot { control: 0, target: 2 }],
        correctable: weight_at_most_one(3, &[Pauli::X]),
        quantum: false,
    }
    .build()
    .expect("bit-flip code tables are consistent")
}

impl CodeSpec {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn correct_errors(&self) -> usize {
        self.correct_errors
    }

    pub fn dim(&self) -> usize {
        1 << self.length
    }

    pub fn stabilizers(&self) -> &[PauliString] {
        &self.stabilizers
    }

    pub fn logical_x(&self) -> PauliString {
        self.logical_x
    }

    pub fn logical_z(&self) -> PauliString {
        self.logical_z
    }

    pub fn logical_zero(&self) -> &CVec {
        &self.logical_zero
    }

    pub fn logical_one(&self) -> &CVec {
        &self.logical_one
    }

    /// `a |0_L> + b |1_L>`.
    pub fn logical_state(&self, a: linalg::C64, b: linalg::C64) -> CVec {
        &self.logical_zero * a + &self.logical_one * b
    }

    pub fn code_space(&self) -> SubspaceIsometry {
        let mut cols = CMat::zeros(self.dim(), 2);
        cols.set_column(0, &self.logical_zero);
        cols.set_column(1, &self.logical_one);
        SubspaceIsometry::new(cols).expect("logical states are orthonormal")
    }

    pub fn encoder_circuit(&self) -> &[Gate] {
        &self.encoder_circuit
    }

    pub fn encoder(&self) -> &CMat {
        &self.encoder
    }

    pub fn recovery(&self) -> &GeneralizedOperator {
        &self.recovery
    }

    pub fn decoder(&self) -> &GeneralizedOperator {
        &self.decoder
    }

    /// Correction for each syndrome; bit `k` of the index is generator `k`.
    pub fn syndrome_table(&self) -> &[PauliString] {
        &self.syndrome_table
    }

    /// Correction on qubit 0 for each ancilla pattern read out after the
    /// inverse encoder (qubit 1 is the most significant pattern bit).
    pub fn decoder_table(&self) -> &[Pauli] {
        &self.decoder_table
    }

    pub fn syndrome_rounds(&self) -> &[SyndromeRound] {
        &self.rounds
    }

    pub fn is_quantum(&self) -> bool {
        self.quantum
    }

    pub fn syndrome_of(&self, error: &PauliString) -> usize {
        error.syndrome(&self.stabilizers)
    }

    /// Primitive operations in the gate-level recovery: all syndrome rounds
    /// plus the longest classically controlled correction.
    pub fn recovery_gate_count(&self) -> usize {
        let rounds: usize = self.rounds.iter().map(|r| r.gates.len()).sum();
        rounds + self.syndrome_table.iter().map(correction_len).max().unwrap_or(0)
    }

    /// Primitive operations in the gate-level decoder: inverse encoder plus
    /// the longest correction on qubit 0.
    pub fn decoder_gate_count(&self) -> usize {
        let corr = self
            .decoder_table
            .iter()
            .map(|p| correction_len(&PauliString::single(1, 0, *p)))
            .max()
            .unwrap_or(0);
        self.encoder_circuit.len() + corr
    }

    /// Ideal recovery applied to an arbitrary (not necessarily Hermitian)
    /// operator on the code qubits.
    pub fn apply_recovery(&self, x: &CMat) -> CMat {
        self.syndrome_table
            .iter()
            .zip(&self.projectors)
            .fold(CMat::zeros(self.dim(), self.dim()), |acc, (corr, proj)| {
                let mut y = proj * x * proj;
                for g in correction_gates(corr) {
                    g.conjugate(&mut y, self.length);
                }
                acc + y
            })
    }

    /// Ideal decoder applied to an arbitrary operator.
    pub fn apply_decoder(&self, x: &CMat) -> CMat {
        let y = self.apply_recovery(x);
        self.encoder.adjoint() * y * &self.encoder
    }

    pub fn apply_encoder(&self, x: &CMat) -> CMat {
        let mut y = x.clone();
        for g in &self.encoder_circuit {
            g.conjugate(&mut y, self.length);
        }
        y
    }
}

/// Bit flip then sign flip per affected qubit.
pub fn correction_gates(p: &PauliString) -> Vec<Gate> {
    let mut gates = Vec::new();
    for q in 0..p.num_qubits() {
        let (x, z) = p.get(q).bits();
        if x {
            gates.push(Gate::X(q));
        }
        if z {
            gates.push(Gate::Z(q));
        }
    }
    gates
}

fn correction_len(p: &PauliString) -> usize {
    correction_gates(p).len()
}

/// `E(R I_1 ⊗ ... ⊗ I_l ↾ C, I ↾ C)` with ideal recovery `R` and one
/// single-qubit operator per code qubit.
pub fn residual_after_recovery_per_qubit(code: &CodeSpec, per_qubit: &[GeneralizedOperator]) -> Result<f64> {
    let l = code.length();
    if per_qubit.len() != l {
        return Err(Error::InvalidArgument(format!(
            "need {l} single-qubit operators, got {}",
            per_qubit.len()
        )));
    }
    let kraus: Vec<Vec<Mat2>> = per_qubit
        .iter()
        .map(|g| {
            if g.dim_in() != 2 || g.dim_out() != 2 {
                return Err(Error::DimensionMismatch {
                    context: "per-qubit operator",
                    left: g.dim_in(),
                    right: 2,
                });
            }
            Ok(g.terms().iter().map(|t| Mat2::from_fn(|i, j| t[(i, j)])).collect())
        })
        .collect::<Result<_>>()?;
    let dim = code.dim();
    let logical = [code.logical_zero(), code.logical_one()];
    let mut choi = CMat::zeros(2 * dim, 2 * dim);
    for a in 0..2 {
        for b in 0..2 {
            let mut x = logical[a] * logical[b].adjoint();
            for (q, k) in kraus.iter().enumerate() {
                local::channel_1q(&mut x, l, q, k);
            }
            let y = code.apply_recovery(&x);
            choi.view_mut((a * dim, b * dim), (dim, dim)).copy_from(&y);
        }
    }
    let op = GeneralizedOperator::from_choi(&choi, 2, dim)?;
    amplitude::error_amplitude_value(&op, code.code_space().columns(), None)
}

/// [`residual_after_recovery_per_qubit`] with the same operator on every qubit.
pub fn residual_after_recovery(code: &CodeSpec, per_qubit: &GeneralizedOperator) -> Result<f64> {
    residual_after_recovery_per_qubit(code, &vec![per_qubit.clone(); code.length()])
}
