//! Dense complex linear algebra shared by the operator calculus and the
//! block simulators.
//!
//! Qubit ordering is big-endian throughout: qubit 0 is the most significant
//! bit of a basis index, so `|q0 q1 ... q(n-1)>` has index
//! `q0 * 2^(n-1) + ... + q(n-1)`.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type Mat2 = Matrix2<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn pauli_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

pub fn hadamard() -> Mat2 {
    let h = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    Mat2::new(h, h, h, -h)
}

pub fn to_dyn(m: &Mat2) -> CMat {
    CMat::from_fn(2, 2, |i, j| m[(i, j)])
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// `|b><b|`-style computational basis vector of dimension `dim`.
pub fn basis(dim: usize, index: usize) -> CVec {
    let mut v = CVec::zeros(dim);
    v[index] = ONE;
    v
}

pub fn frobenius_norm(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigen-decomposition of a Hermitian matrix. The input is symmetrized first;
/// eigenpairs are returned with eigenvalues in descending order.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMat::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    (values, vectors)
}

/// Largest eigenvalue of a Hermitian matrix.
pub fn lambda_max(m: &CMat) -> f64 {
    if m.nrows() == 2 {
        // closed form keeps the hot path of the minimizers allocation-free
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
        let mean = 0.5 * (a + d);
        let half = 0.5 * (a - d);
        return mean + (half * half + b.norm_sqr()).sqrt();
    }
    hermitian_eigen(m).0[0]
}

/// Column-stacking vectorization.
pub fn vectorize(m: &CMat) -> CVec {
    CVec::from_iterator(m.len(), m.iter().copied())
}

pub fn unvectorize(v: &CVec, rows: usize, cols: usize) -> CMat {
    CMat::from_iterator(rows, cols, v.iter().copied())
}

/// Orthonormalizes the columns of `m` with the polar factor `m (m^† m)^{-1/2}`.
/// Columns must be linearly independent.
pub fn polar_isometry(m: &CMat) -> CMat {
    let gram = m.adjoint() * m;
    let (vals, vecs) = hermitian_eigen(&gram);
    let inv_sqrt = CMat::from_diagonal(&CVec::from_iterator(
        vals.len(),
        vals.iter().map(|&v| c(1.0 / v.max(1e-300).sqrt(), 0.0)),
    ));
    let mut x = m * (&vecs * inv_sqrt * vecs.adjoint());
    // Newton-Schulz steps restore orthonormality lost to conditioning
    for _ in 0..2 {
        let g = x.adjoint() * &x;
        x = &x * (identity(g.nrows()) * c(1.5, 0.0) - g * c(0.5, 0.0));
    }
    x
}

/// Largest entrywise deviation of `m^† m` from the identity.
pub fn isometry_defect(m: &CMat) -> f64 {
    let g = m.adjoint() * m;
    let n = g.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { ONE } else { ZERO };
            worst = worst.max((g[(i, j)] - target).norm());
        }
    }
    worst
}

/// In-place local operations on a density-like operator over `n` qubits.
///
/// These act on arbitrary (not necessarily Hermitian) operators, which lets
/// the block simulators push the operator basis `|i><j|` through a circuit.
pub mod local {
    use super::*;

    #[inline]
    fn mask(n: usize, q: usize) -> usize {
        1 << (n - 1 - q)
    }

    /// `rho <- U rho` with `U` acting on qubit `q`.
    pub fn left_1q(rho: &mut CMat, n: usize, q: usize, u: &Mat2) {
        let m = mask(n, q);
        let dim = rho.nrows();
        for col in 0..rho.ncols() {
            for i in 0..dim {
                if i & m != 0 {
                    continue;
                }
                let a = rho[(i, col)];
                let b = rho[(i | m, col)];
                rho[(i, col)] = u[(0, 0)] * a + u[(0, 1)] * b;
                rho[(i | m, col)] = u[(1, 0)] * a + u[(1, 1)] * b;
            }
        }
    }

    /// `rho <- rho U^†` with `U` acting on qubit `q`.
    pub fn right_1q_adjoint(rho: &mut CMat, n: usize, q: usize, u: &Mat2) {
        let m = mask(n, q);
        let dim = rho.ncols();
        let (u00, u01, u10, u11) = (
            u[(0, 0)].conj(),
            u[(0, 1)].conj(),
            u[(1, 0)].conj(),
            u[(1, 1)].conj(),
        );
        for j in 0..dim {
            if j & m != 0 {
                continue;
            }
            for row in 0..rho.nrows() {
                let a = rho[(row, j)];
                let b = rho[(row, j | m)];
                rho[(row, j)] = a * u00 + b * u01;
                rho[(row, j | m)] = a * u10 + b * u11;
            }
        }
    }

    pub fn conjugate_1q(rho: &mut CMat, n: usize, q: usize, u: &Mat2) {
        left_1q(rho, n, q, u);
        right_1q_adjoint(rho, n, q, u);
    }

    /// `rho <- sum_k K_k rho K_k^†` for a single-qubit channel on qubit `q`.
    pub fn channel_1q(rho: &mut CMat, n: usize, q: usize, kraus: &[Mat2]) {
        if let [only] = kraus {
            conjugate_1q(rho, n, q, only);
            return;
        }
        let mut acc = CMat::zeros(rho.nrows(), rho.ncols());
        for k in kraus {
            let mut t = rho.clone();
            conjugate_1q(&mut t, n, q, k);
            acc += t;
        }
        *rho = acc;
    }

    /// Conjugation by a basis permutation `|b> -> |perm(b)>`.
    pub fn permute(rho: &mut CMat, perm: impl Fn(usize) -> usize) {
        let dim = rho.nrows();
        let p: Vec<usize> = (0..dim).map(perm).collect();
        let old = rho.clone();
        for i in 0..dim {
            for j in 0..dim {
                rho[(p[i], p[j])] = old[(i, j)];
            }
        }
    }

    /// Conjugation by a diagonal `±1` phase `|b> -> sign(b)|b>`.
    pub fn diagonal_sign(rho: &mut CMat, negative: impl Fn(usize) -> bool) {
        let dim = rho.nrows();
        let s: Vec<bool> = (0..dim).map(negative).collect();
        for i in 0..dim {
            for j in 0..dim {
                if s[i] != s[j] {
                    rho[(i, j)] = -rho[(i, j)];
                }
            }
        }
    }

    pub fn cnot(rho: &mut CMat, n: usize, control: usize, target: usize) {
        let (mc, mt) = (mask(n, control), mask(n, target));
        permute(rho, |b| if b & mc != 0 { b ^ mt } else { b });
    }

    pub fn cz(rho: &mut CMat, n: usize, a: usize, b: usize) {
        let (ma, mb) = (mask(n, a), mask(n, b));
        diagonal_sign(rho, |x| x & ma != 0 && x & mb != 0);
    }

    /// Applies the single-qubit linear map with column-stacking
    /// superoperator `s` (4x4) to qubit `q`: with `X = sum |c><c'| (x) X_cc'`,
    /// the output is `sum Phi(|c><c'|) (x) X_cc'`.
    pub fn superop_1q(x: &CMat, n: usize, q: usize, s: &CMat) -> CMat {
        let m = mask(n, q);
        let mut out = CMat::zeros(x.nrows(), x.ncols());
        for i in (0..x.nrows()).filter(|i| i & m == 0) {
            for j in (0..x.ncols()).filter(|j| j & m == 0) {
                // vec index of |r><r'| is r' * 2 + r
                let v = [x[(i, j)], x[(i | m, j)], x[(i, j | m)], x[(i | m, j | m)]];
                for (k, (r, rp)) in [(0, 0), (1, 0), (0, 1), (1, 1)].into_iter().enumerate() {
                    let val = (0..4).fold(ZERO, |acc, l| acc + s[(k, l)] * v[l]);
                    out[(if r == 1 { i | m } else { i }, if rp == 1 { j | m } else { j })] = val;
                }
            }
        }
        out
    }

    /// Traces out every qubit except those in `keep` (kept in order).
    pub fn partial_trace_keep(rho: &CMat, n: usize, keep: &[usize]) -> CMat {
        let k = keep.len();
        let out_dim = 1 << k;
        let traced: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let mut out = CMat::zeros(out_dim, out_dim);
        let compose = |kept_bits: usize, traced_bits: usize| -> usize {
            let mut idx = 0;
            for (pos, &q) in keep.iter().enumerate() {
                if kept_bits >> (k - 1 - pos) & 1 == 1 {
                    idx |= mask(n, q);
                }
            }
            for (pos, &q) in traced.iter().enumerate() {
                if traced_bits >> (traced.len() - 1 - pos) & 1 == 1 {
                    idx |= mask(n, q);
                }
            }
            idx
        };
        for t in 0..(1usize << traced.len()) {
            for a in 0..out_dim {
                for b in 0..out_dim {
                    out[(a, b)] += rho[(compose(a, t), compose(b, t))];
                }
            }
        }
        out
    }
}
