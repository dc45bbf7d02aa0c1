//! Single-qubit channels stored as their deviation from the identity.
//!
//! A [`QubitChannel`] keeps `Delta = S - I`, where `S` is the column-stacking
//! superoperator (`vec(Phi(X)) = S vec(X)`). Composition and the error
//! amplitude are computed from `Delta` directly, so a channel within
//! `1e-20` of the identity is still resolved to full relative precision.

use crate::amplitude;
use crate::error::{Error, Result};
use crate::linalg::{self, c, local, CMat, ZERO};
use crate::oper::GeneralizedOperator;
use crate::pauli::Pauli;

#[derive(Debug, Clone, PartialEq)]
pub struct QubitChannel {
    delta: CMat,
}

/// `S[r' * 2 + r, c' * 2 + c] = J[c * 2 + r, c' * 2 + r']`; the map is its
/// own inverse.
pub fn reshuffle(m: &CMat) -> CMat {
    CMat::from_fn(4, 4, |row, col| {
        let (r, rp) = (row % 2, row / 2);
        let (cc, cp) = (col % 2, col / 2);
        m[(cc * 2 + r, cp * 2 + rp)]
    })
}

impl QubitChannel {
    pub fn identity() -> Self {
        Self { delta: CMat::zeros(4, 4) }
    }

    pub fn from_deviation(delta: CMat) -> Result<Self> {
        if delta.shape() != (4, 4) {
            return Err(Error::ShapeMismatch {
                context: "qubit superoperator",
                expected: (4, 4),
                found: delta.shape(),
            });
        }
        Ok(Self { delta })
    }

    pub fn from_superop(s: &CMat) -> Result<Self> {
        Self::from_deviation(s - linalg::identity(4))
    }

    pub fn from_operator(op: &GeneralizedOperator) -> Result<Self> {
        if op.dim_in() != 2 || op.dim_out() != 2 {
            return Err(Error::DimensionMismatch {
                context: "qubit channel",
                left: op.dim_in(),
                right: 2,
            });
        }
        let s = op.terms().iter().fold(CMat::zeros(4, 4), |acc, a| acc + linalg::kron(&a.map(|v| v.conj()), a));
        Self::from_superop(&s)
    }

    pub fn pauli(p: Pauli) -> Self {
        Self::from_operator(&GeneralizedOperator::from_matrix(linalg::to_dyn(&p.matrix())))
            .expect("Pauli is a qubit operator")
    }

    pub fn deviation(&self) -> &CMat {
        &self.delta
    }

    pub fn superop(&self) -> CMat {
        &self.delta + linalg::identity(4)
    }

    pub fn choi(&self) -> CMat {
        reshuffle(&self.superop())
    }

    pub fn choi_deviation(&self) -> CMat {
        reshuffle(&self.delta)
    }

    /// Minimal Kraus form.
    pub fn to_operator(&self) -> Result<GeneralizedOperator> {
        GeneralizedOperator::from_choi(&self.choi(), 2, 2)
    }

    /// `E(Phi, I)`, exact for trace-preserving channels.
    pub fn error_amplitude(&self) -> Result<f64> {
        amplitude::qubit_deviation_amplitude(&self.choi_deviation())
    }

    /// `max |tr Phi(X) - tr X|` over the operator basis.
    pub fn trace_defect(&self) -> f64 {
        (0..4)
            .map(|col| (self.delta[(0, col)] + self.delta[(3, col)]).norm())
            .fold(0.0, f64::max)
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &QubitChannel) -> QubitChannel {
        QubitChannel {
            delta: &next.delta + &self.delta + &next.delta * &self.delta,
        }
    }

    /// `self` applied `k` times.
    pub fn power(&self, k: usize) -> QubitChannel {
        (0..k).fold(QubitChannel::identity(), |acc, _| acc.then(self))
    }

    /// Diagonal of the process matrix in the Pauli basis, `(p_I, p_X, p_Y, p_Z)`.
    /// For Pauli channels these are the error probabilities; `p_I` is
    /// computed as `1 + (deviation term)` so small error rates keep precision.
    pub fn pauli_weights(&self) -> [f64; 4] {
        let jd = self.choi_deviation();
        let basis = crate::oper::pauli_basis().map(|p| linalg::vectorize(&p));
        let w = |k: usize| (basis[k].adjoint() * &jd * &basis[k])[(0, 0)].re / 4.0;
        [1.0 + w(0), w(1), w(2), w(3)]
    }

    /// `X + D_q(X)`: the channel on qubit `q` of an `n`-qubit operator.
    pub fn apply_on(&self, x: &CMat, n: usize, q: usize) -> CMat {
        x + self.apply_deviation_on(x, n, q)
    }

    /// `D_q(X)` with `D = Phi - id`.
    pub fn apply_deviation_on(&self, x: &CMat, n: usize, q: usize) -> CMat {
        if self.is_exact_identity() {
            return CMat::zeros(x.nrows(), x.ncols());
        }
        local::superop_1q(x, n, q, &self.delta)
    }

    pub fn is_exact_identity(&self) -> bool {
        self.delta.iter().all(|v| *v == ZERO)
    }

    /// Applies the channel to a single-qubit operator.
    pub fn apply(&self, x: &CMat) -> CMat {
        let v = linalg::vectorize(x);
        linalg::unvectorize(&(self.superop() * v), 2, 2)
    }
}

/// Pauli channel `rho -> sum_P p_P P rho P` from `(p_x, p_y, p_z)`.
pub fn pauli_channel(px: f64, py: f64, pz: f64) -> QubitChannel {
    let d = [px, py, pz];
    let mut delta = CMat::zeros(4, 4);
    for (k, p) in [Pauli::X, Pauli::Y, Pauli::Z].into_iter().enumerate() {
        let s = QubitChannel::pauli(p).superop();
        delta += (s - linalg::identity(4)) * c(d[k], 0.0);
    }
    QubitChannel { delta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::ChannelSpec;

    #[test]
    fn reshuffle_is_an_involution_and_matches_choi() {
        let op = ChannelSpec::amplitude_damping(0.3).unwrap().build();
        let ch = QubitChannel::from_operator(&op).unwrap();
        assert!(linalg::frobenius_norm(&(ch.choi() - op.choi())) < 1e-12);
        assert!(linalg::frobenius_norm(&(reshuffle(&ch.choi()) - ch.superop())) < 1e-12);
    }

    #[test]
    fn superop_1q_matches_kraus_application() {
        let op = ChannelSpec::rotation([0.6, 0.0, 0.8], 0.7).unwrap().build();
        let ch = QubitChannel::from_operator(&op).unwrap();
        let x = CMat::from_fn(8, 8, |i, j| c((3 * i + j) as f64 * 0.1, (i as f64) - 0.3 * j as f64));
        let kraus: Vec<linalg::Mat2> =
            op.terms().iter().map(|t| linalg::Mat2::from_fn(|i, j| t[(i, j)])).collect();
        for q in 0..3 {
            let mut expected = x.clone();
            local::channel_1q(&mut expected, 3, q, &kraus);
            assert!(linalg::frobenius_norm(&(ch.apply_on(&x, 3, q) - expected)) < 1e-12);
        }
    }

    #[test]
    fn deviation_amplitude_matches_general_solver() {
        for text in ["dephasing:0.04", "rotation:z:0.5236", "depolarizing:0.1", "amplitude_damping:0.2", "rotation:0.6,0,0.8:1.1"] {
            let spec: ChannelSpec = text.parse().unwrap();
            let ch = QubitChannel::from_operator(&spec.build()).unwrap();
            let a = ch.error_amplitude().unwrap();
            let b = spec.channel_error().unwrap();
            assert!((a - b).abs() < 1e-9, "{text}: {a} vs {b}");
        }
    }

    #[test]
    fn tiny_pauli_channel_keeps_precision() {
        let ch = pauli_channel(1e-30, 0.0, 3e-30);
        let e = ch.error_amplitude().unwrap();
        assert!((e - 2e-15).abs() < 1e-24, "{e}");
        let w = ch.pauli_weights();
        assert!((w[1] - 1e-30).abs() < 1e-40 && (w[3] - 3e-30).abs() < 1e-40);
    }

    #[test]
    fn composition_matches_superop_product() {
        let a = QubitChannel::from_operator(&ChannelSpec::dephasing(0.2).unwrap().build()).unwrap();
        let b = QubitChannel::from_operator(&ChannelSpec::amplitude_damping(0.4).unwrap().build()).unwrap();
        let ab = a.then(&b);
        assert!(linalg::frobenius_norm(&(ab.superop() - b.superop() * a.superop())) < 1e-12);
        assert!(ab.trace_defect() < 1e-12);
        assert!(linalg::frobenius_norm(&(a.power(3).superop() - a.superop() * a.superop() * a.superop())) < 1e-12);
    }
}
