//! Error amplitude `E(A, B)` of a generalized operator against an isometry.
//!
//! `E(A, B)` is the smallest `eps` such that `A = lambda B' + R` with `B'`
//! equivalent to `B`, `|lambda| <= 1` and strength `|R| <= eps`. With `A` in
//! canonical form, `lambda B'` ranges over `mu (x) B` for environment
//! coefficient vectors `mu` with `|mu| <= 1` (components of `B'` outside the
//! span of `A`'s environment only add a positive semidefinite term), so
//!
//! ```text
//! E(A, B)^2 = min_{|mu| <= 1} lambda_max( M(mu) )
//! M(mu)     = sum_k (A_k - mu_k B)^† (A_k - mu_k B)
//!           = S - sum_k (mu_k C_k^† + conj(mu_k) C_k) + |mu|^2 I,
//! S = sum_k A_k^† A_k,   C_k = B^† A_k.
//! ```
//!
//! Writing `lambda_max(M) = max_rho tr(rho M)` over density matrices and
//! exchanging min and max gives the concave dual
//!
//! ```text
//! g(rho) = tr(rho S) - sum_k |tr(rho C_k)|^2,    mu_k(rho) = tr(rho C_k),
//! ```
//!
//! whose optimal `rho` yields the unique primal minimizer `mu = mu(rho)`.
//! For generalized-unitary `A`, Cauchy-Schwarz gives `|mu(rho)| <= 1` for
//! every `rho`, so the norm constraint never binds.
//!
//! For a two-dimensional domain (a qubit, or a code space) the dual is a
//! concave quadratic over the Bloch ball and is solved exactly. Larger
//! domains use accelerated projected gradient ascent over density matrices.
//! Either way the returned value is the primal objective at the recovered
//! `mu`, certified against the dual value.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, C64, ZERO};
use crate::oper::{GeneralizedOperator, SubspaceIsometry};

/// Absolute tolerance on the error amplitude (primal minus dual, in amplitude units).
pub const AMPLITUDE_TOL: f64 = 1e-6;
/// Iteration cap for the iterative dual solver.
pub const MAX_ITERATIONS: usize = 10_000;

const GAP_TARGET: f64 = 1e-8;
/// Largest domain handled by the interior-point solver.
const BARRIER_MAX_DIM: usize = 8;
const ISOMETRY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct AmplitudeSolution {
    /// Primal objective at `mu`; an upper bound on the exact amplitude.
    pub value: f64,
    /// Dual objective; a lower bound on the exact amplitude.
    pub lower_bound: f64,
    /// Minimizing environment coefficients, one per Kraus term of `A`.
    pub mu: Vec<C64>,
    pub iterations: usize,
}

/// `E(A ↾ C, B ↾ C)` where `C` is the range of `sub` (the whole input space
/// when `sub` is `None`) and `reference` is the matrix of `B`.
pub fn error_amplitude(
    op: &GeneralizedOperator,
    reference: &CMat,
    sub: Option<&SubspaceIsometry>,
) -> Result<AmplitudeSolution> {
    let problem = Problem::new(op, reference, sub)?;
    problem.solve()
}

/// Convenience wrapper returning only the amplitude value.
pub fn error_amplitude_value(
    op: &GeneralizedOperator,
    reference: &CMat,
    sub: Option<&SubspaceIsometry>,
) -> Result<f64> {
    error_amplitude(op, reference, sub).map(|s| s.value)
}

/// The primal objective `sqrt(lambda_max(M(mu)))` for given coefficients.
pub fn primal_objective(
    op: &GeneralizedOperator,
    reference: &CMat,
    sub: Option<&SubspaceIsometry>,
    mu: &[C64],
) -> Result<f64> {
    let problem = Problem::new(op, reference, sub)?;
    if mu.len() != problem.c.len() {
        return Err(Error::DimensionMismatch {
            context: "mu length",
            left: problem.c.len(),
            right: mu.len(),
        });
    }
    Ok(problem.primal(mu).max(0.0).sqrt())
}

/// `E(Phi, I)` for a trace-preserving qubit channel given by the deviation
/// `J - J_id` of its Choi matrix from that of the identity channel.
///
/// With `S = I` the dual becomes `E^2 = max_rho -vec(rho)^† (J - J_id) vec(rho)`
/// because `vec(rho)^† J_id vec(rho) = |tr rho|^2 = 1`. Working from the
/// deviation keeps full relative precision for channels arbitrarily close to
/// the identity, where forming Kraus terms would round the error away.
pub fn qubit_deviation_amplitude(delta_choi: &CMat) -> Result<f64> {
    if delta_choi.shape() != (4, 4) {
        return Err(Error::ShapeMismatch {
            context: "qubit Choi deviation",
            expected: (4, 4),
            found: delta_choi.shape(),
        });
    }
    let basis = crate::oper::pauli_basis().map(|p| linalg::vectorize(&p));
    let form = |a: usize, b: usize| (basis[a].adjoint() * delta_choi * &basis[b])[(0, 0)].re;
    // rho = (I + r·sigma)/2:  E^2(r) = konst + b·r - r^T q r
    let konst = -0.25 * form(0, 0);
    let b = Vector3::from_fn(|a, _| -0.25 * (form(0, a + 1) + form(a + 1, 0)));
    let q = Matrix3::from_fn(|a, bb| 0.125 * (form(a + 1, bb + 1) + form(bb + 1, a + 1)));
    let r = maximize_concave_quadratic_on_ball(&q, &b);
    let value = konst + b.dot(&r) - (r.transpose() * q * r)[(0, 0)];
    Ok(value.max(0.0).sqrt())
}

impl AmplitudeSolution {
    /// Keeps the better primal point and the better dual bound.
    fn merge(&mut self, other: AmplitudeSolution) {
        if other.value < self.value {
            self.value = other.value;
            self.mu = other.mu;
        }
        self.lower_bound = self.lower_bound.max(other.lower_bound).min(self.value);
    }
}

struct Problem {
    d: usize,
    s: CMat,
    c: Vec<CMat>,
    terms: Vec<CMat>,
    b: CMat,
}

impl Problem {
    fn new(
        op: &GeneralizedOperator,
        reference: &CMat,
        sub: Option<&SubspaceIsometry>,
    ) -> Result<Self> {
        let (terms, b): (Vec<CMat>, CMat) = match sub {
            Some(p) => {
                if p.ambient_dim() != op.dim_in() {
                    return Err(Error::DimensionMismatch {
                        context: "subspace ambient dimension",
                        left: op.dim_in(),
                        right: p.ambient_dim(),
                    });
                }
                if reference.ncols() != op.dim_in() {
                    return Err(Error::DimensionMismatch {
                        context: "reference input dimension",
                        left: op.dim_in(),
                        right: reference.ncols(),
                    });
                }
                (
                    op.terms().iter().map(|a| a * p.columns()).collect(),
                    reference * p.columns(),
                )
            }
            None => (op.terms().to_vec(), reference.clone()),
        };
        let d = sub.map_or(op.dim_in(), SubspaceIsometry::sub_dim);
        if b.shape() != (op.dim_out(), d) {
            return Err(Error::ShapeMismatch {
                context: "reference operator",
                expected: (op.dim_out(), d),
                found: b.shape(),
            });
        }
        let deviation = linalg::isometry_defect(&b);
        if deviation > ISOMETRY_TOL {
            return Err(Error::NotIsometry { deviation });
        }
        let mut s = CMat::zeros(d, d);
        for a in &terms {
            s += a.adjoint() * a;
        }
        let bt = b.adjoint();
        let c = terms.iter().map(|a| &bt * a).collect();
        Ok(Self { d, s, c, terms, b })
    }

    /// `M(mu)` summed as `sum_k R_k^† R_k`, `R_k = A_k - mu_k B`, which keeps
    /// full relative precision when `A` is close to `B`.
    fn m_of(&self, mu: &[C64]) -> CMat {
        let mut m = CMat::zeros(self.d, self.d);
        for (a, &muk) in self.terms.iter().zip(mu) {
            let r = a - &self.b * muk;
            m += r.adjoint() * r;
        }
        m
    }

    /// `lambda_max(M(mu))`, the squared primal objective.
    fn primal(&self, mu: &[C64]) -> f64 {
        linalg::lambda_max(&self.m_of(mu))
    }

    fn mu_of(&self, rho: &CMat) -> Vec<C64> {
        self.c.iter().map(|ck| trace_product(rho, ck)).collect()
    }

    /// Squared dual objective `g(rho)`.
    fn dual(&self, rho: &CMat) -> f64 {
        let mu = self.mu_of(rho);
        trace_product(rho, &self.s).re - mu.iter().map(|m| m.norm_sqr()).sum::<f64>()
    }

    fn solve(&self) -> Result<AmplitudeSolution> {
        let k = self.c.len();
        if k == 0 {
            return Ok(AmplitudeSolution {
                value: 0.0,
                lower_bound: 0.0,
                mu: Vec::new(),
                iterations: 0,
            });
        }
        let mut iterations = 0;
        let mut best = match self.d {
            1 => self.certify(&CMat::identity(1, 1), 0),
            2 => self.certify(&self.solve_bloch(), 0),
            d if d <= BARRIER_MAX_DIM => {
                let (rho, it) = self.solve_barrier();
                iterations = it;
                self.certify(&rho, it)
            }
            _ => {
                let (rho, it) = self.solve_projected();
                iterations = it;
                self.certify(&rho, it)
            }
        };
        if best.value - best.lower_bound > AMPLITUDE_TOL && self.d == 2 {
            // the closed form lost precision; fall back to the iterative solver
            let (rho, it) = self.solve_projected();
            iterations = it;
            best.merge(self.certify(&rho, it));
        }
        if best.value - best.lower_bound > GAP_TARGET && self.d > 2 {
            for candidate in self.refine(&best.mu.clone()) {
                best.merge(self.certify(&candidate, iterations));
            }
        }
        // extra starting points: mu = tr(B^† A_k)/d and mu = 0
        let maximally_mixed = CMat::identity(self.d, self.d) * c(1.0 / self.d as f64, 0.0);
        for mu in [self.mu_of(&maximally_mixed), vec![ZERO; k]] {
            let v = self.primal(&mu).max(0.0).sqrt();
            if v < best.value {
                best.value = v;
                best.mu = mu;
            }
        }
        best.iterations = iterations;
        if best.value - best.lower_bound > AMPLITUDE_TOL {
            return Err(Error::NoConvergence {
                best: best.value,
                lower: best.lower_bound,
                iterations,
            });
        }
        Ok(best)
    }

    fn certify(&self, rho: &CMat, iterations: usize) -> AmplitudeSolution {
        let mu = self.mu_of(rho);
        let value = self.primal(&mu).max(0.0).sqrt();
        let lower_bound = self.dual(rho).max(0.0).sqrt().min(value);
        AmplitudeSolution {
            value,
            lower_bound,
            mu,
            iterations,
        }
    }

    /// Active-set refinement. The optimal `rho` lives on the top eigenspace
    /// of `M(mu*)`; for each candidate cluster of near-top eigenvectors `V`
    /// the dual restricted to `V rho' V^†` is the same problem with `A_k V`
    /// and `B V`, solved exactly when the cluster has at most two vectors.
    fn refine(&self, mu: &[C64]) -> Vec<CMat> {
        let m = self.m_of(mu);
        let (vals, vecs) = linalg::hermitian_eigen(&m);
        let top = vals[0];
        let scale = top.abs().max(1e-300);
        let mut sizes: Vec<usize> = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-8]
            .iter()
            .map(|tol| vals.iter().take_while(|&&v| v >= top - tol * scale).count())
            .chain([1, 2])
            .filter(|&n| n < self.d)
            .collect();
        sizes.sort_unstable();
        sizes.dedup();
        let mut out = Vec::new();
        for n in sizes {
            let v = vecs.columns(0, n).into_owned();
            let sub = Problem {
                d: n,
                s: v.adjoint() * &self.s * &v,
                c: self.c.iter().map(|ck| v.adjoint() * ck * &v).collect(),
                terms: self.terms.iter().map(|a| a * &v).collect(),
                b: &self.b * &v,
            };
            let sigma = match n {
                1 => CMat::identity(1, 1),
                2 => sub.solve_bloch(),
                _ => sub.solve_projected().0,
            };
            out.push(&v * sigma * v.adjoint());
        }
        out
    }

    /// Exact dual maximizer for `d = 2` with `rho = (I + r·sigma)/2`, `|r| <= 1`.
    fn solve_bloch(&self) -> CMat {
        let sigmas = [linalg::pauli_x(), linalg::pauli_y(), linalg::pauli_z()]
            .map(|m| linalg::to_dyn(&m));
        let half = c(0.5, 0.0);
        let mut b = Vector3::zeros();
        let mut q = Matrix3::zeros();
        for (j, sj) in sigmas.iter().enumerate() {
            b[j] = 0.5 * trace_product(sj, &self.s).re;
        }
        for ck in &self.c {
            let alpha = ck.trace() * half;
            let beta: [C64; 3] = std::array::from_fn(|j| trace_product(&sigmas[j], ck) * half);
            for i in 0..3 {
                b[i] -= 2.0 * (alpha.conj() * beta[i]).re;
                for j in 0..3 {
                    q[(i, j)] += (beta[i].conj() * beta[j]).re;
                }
            }
        }
        let r = maximize_concave_quadratic_on_ball(&q, &b);
        let mut rho = CMat::identity(2, 2);
        for (j, sj) in sigmas.iter().enumerate() {
            rho += sj * c(r[j], 0.0);
        }
        rho * half
    }

    /// Interior-point ascent on the dual: Newton steps on
    /// `g(rho) + tau log det rho` along a decreasing `tau`, with `rho`
    /// parametrized as `I/d + sum_j x_j F_j` over a traceless Hermitian
    /// orthonormal basis `F_j`. The quadratic part of `g` has a constant
    /// Hessian, so each step is a small dense solve.
    fn solve_barrier(&self) -> (CMat, usize) {
        let d = self.d;
        let basis = traceless_basis(d);
        let n = basis.len();
        let inv_d = c(1.0 / d as f64, 0.0);
        let alpha: Vec<C64> = self.c.iter().map(|ck| ck.trace() * inv_d).collect();
        let beta: Vec<Vec<C64>> = self.c.iter().map(|ck| basis.iter().map(|f| trace_product(f, ck)).collect()).collect();
        let lin: Vec<f64> = basis.iter().map(|f| trace_product(f, &self.s).re).collect();
        let mut hg = DMatrix::<f64>::zeros(n, n);
        for bk in &beta {
            for i in 0..n {
                for j in 0..n {
                    hg[(i, j)] -= 2.0 * (bk[i].conj() * bk[j]).re;
                }
            }
        }
        let rho_of = |x: &DVector<f64>| {
            let mut rho = CMat::identity(d, d) * inv_d;
            for (f, &xj) in basis.iter().zip(x.iter()) {
                rho += f * c(xj, 0.0);
            }
            rho
        };
        let objective = |x: &DVector<f64>, tau: f64| -> Option<f64> {
            let rho = rho_of(x);
            let (vals, _) = linalg::hermitian_eigen(&rho);
            if vals[d - 1] <= 0.0 {
                return None;
            }
            let logdet: f64 = vals.iter().map(|v| v.ln()).sum();
            Some(self.dual(&rho) + tau * logdet)
        };
        let scale = linalg::lambda_max(&self.s).abs().max(f64::MIN_POSITIVE);
        let mut x = DVector::<f64>::zeros(n);
        let mut tau = 0.1 * scale;
        let mut iterations = 0;
        while tau > 1e-15 * scale {
            for _ in 0..60 {
                iterations += 1;
                let rho = rho_of(&x);
                let (vals, vecs) = linalg::hermitian_eigen(&rho);
                if vals[d - 1] <= 0.0 {
                    break;
                }
                let inv_vals = CVec::from_iterator(d, vals.iter().map(|v| c(1.0 / v, 0.0)));
                let inv = &vecs * CMat::from_diagonal(&inv_vals) * vecs.adjoint();
                let mu: Vec<C64> = alpha.iter().zip(&beta).map(|(a, b)| *a + b.iter().zip(x.iter()).map(|(bj, &xj)| bj * xj).sum::<C64>()).collect();
                let inv_f: Vec<CMat> = basis.iter().map(|f| &inv * f).collect();
                let mut grad = DVector::<f64>::zeros(n);
                let mut hess = hg.clone();
                for i in 0..n {
                    let mut gi = lin[i] + tau * inv_f[i].trace().re;
                    for (m, bk) in mu.iter().zip(&beta) {
                        gi -= 2.0 * (m.conj() * bk[i]).re;
                    }
                    grad[i] = gi;
                    for j in 0..=i {
                        let h = -tau * trace_product(&inv_f[i], &inv_f[j]).re;
                        hess[(i, j)] += h;
                        if i != j {
                            hess[(j, i)] += h;
                        }
                    }
                }
                let neg = -&hess;
                let Some(step) = nalgebra::Cholesky::new(neg).map(|ch| ch.solve(&grad)) else { break };
                let decrement = grad.dot(&step);
                if decrement <= 1e-15 * scale {
                    break;
                }
                let f0 = objective(&x, tau).unwrap_or(f64::NEG_INFINITY);
                let mut t = 1.0;
                let mut moved = false;
                while t > 1e-12 {
                    let trial = &x + &step * t;
                    if let Some(f1) = objective(&trial, tau) {
                        if f1 >= f0 + 0.25 * t * decrement {
                            x = trial;
                            moved = true;
                            break;
                        }
                    }
                    t *= 0.5;
                }
                if !moved {
                    break;
                }
            }
            tau *= 0.1;
        }
        (rho_of(&x), iterations)
    }

    /// Accelerated projected gradient ascent on the dual over density matrices,
    /// stopped on a primal-dual certificate.
    fn solve_projected(&self) -> (CMat, usize) {
        let d = self.d;
        let lipschitz = 2.0
            * self
                .c
                .iter()
                .map(|ck| linalg::frobenius_norm(ck).powi(2))
                .sum::<f64>()
                .max(1e-12);
        let step = c(1.0 / lipschitz, 0.0);
        let mut x = CMat::identity(d, d) * c(1.0 / d as f64, 0.0);
        let mut y = x.clone();
        let mut t = 1.0f64;
        let mut gx = self.dual(&x);
        let mut best_rho = x.clone();
        let mut best_primal = f64::INFINITY;
        let mut best_dual = gx;
        for it in 0..MAX_ITERATIONS {
            let mu = self.mu_of(&y);
            let mut grad = self.s.clone();
            for (ck, m) in self.c.iter().zip(&mu) {
                grad -= ck * m.conj() + ck.adjoint() * *m;
            }
            let x_next = project_to_density(&(&y + grad * step));
            let g_next = self.dual(&x_next);
            if g_next < gx {
                // adaptive restart
                t = 1.0;
                y = x.clone();
                continue;
            }
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            y = &x_next + (&x_next - &x) * c((t - 1.0) / t_next, 0.0);
            t = t_next;
            x = x_next;
            gx = g_next;
            if it % 10 == 0 || it + 1 == MAX_ITERATIONS {
                let p = self.primal(&self.mu_of(&x));
                if p < best_primal {
                    best_primal = p;
                    best_rho = x.clone();
                }
                best_dual = best_dual.max(gx);
                let gap = best_primal.max(0.0).sqrt() - best_dual.max(0.0).sqrt();
                if gap <= GAP_TARGET {
                    return (best_rho, it + 1);
                }
            }
        }
        (best_rho, MAX_ITERATIONS)
    }
}

/// Hermitian, traceless, Hilbert-Schmidt orthonormal basis of dimension `d^2 - 1`.
fn traceless_basis(d: usize) -> Vec<CMat> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in j + 1..d {
            let mut sym = CMat::zeros(d, d);
            sym[(j, k)] = c(h, 0.0);
            sym[(k, j)] = c(h, 0.0);
            out.push(sym);
            let mut anti = CMat::zeros(d, d);
            anti[(j, k)] = c(0.0, -h);
            anti[(k, j)] = c(0.0, h);
            out.push(anti);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = CMat::zeros(d, d);
        for i in 0..l {
            diag[(i, i)] = c(norm, 0.0);
        }
        diag[(l, l)] = c(-(l as f64) * norm, 0.0);
        out.push(diag);
    }
    out
}

/// `tr(a b)` without forming the product.
fn trace_product(a: &CMat, b: &CMat) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Maximizes `b·r - r^T q r` over `|r| <= 1` for positive semidefinite `q`.
fn maximize_concave_quadratic_on_ball(q: &Matrix3<f64>, b: &Vector3<f64>) -> Vector3<f64> {
    let eig = nalgebra::SymmetricEigen::new(*q);
    let vals = eig.eigenvalues.map(|v| v.max(0.0));
    let vecs = eig.eigenvectors;
    let chat = vecs.transpose() * b;
    let scale = vals.amax().max(chat.amax()).max(f64::MIN_POSITIVE);
    let tiny = 1e-14 * scale;

    let interior = (0..3).all(|i| vals[i] > tiny || chat[i].abs() <= tiny);
    if interior {
        let r0 = Vector3::from_fn(|i, _| {
            if vals[i] > tiny {
                chat[i] / (2.0 * vals[i])
            } else {
                0.0
            }
        });
        if r0.norm() <= 1.0 {
            return vecs * r0;
        }
    }
    // boundary: find nu > 0 with sum chat_i^2 / (4 (q_i + nu)^2) = 1
    let radius = |nu: f64| -> f64 {
        (0..3)
            .map(|i| {
                let den = 2.0 * (vals[i] + nu);
                if den == 0.0 {
                    if chat[i] == 0.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    (chat[i] / den).powi(2)
                }
            })
            .sum::<f64>()
    };
    let (mut lo, mut hi) = (0.0f64, 0.5 * chat.norm() + f64::MIN_POSITIVE);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if radius(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let nu = hi;
    let r = Vector3::from_fn(|i, _| chat[i] / (2.0 * (vals[i] + nu)));
    let r = vecs * r;
    let n = r.norm();
    if n > 1.0 {
        r / n
    } else {
        r
    }
}

/// Euclidean projection of a Hermitian matrix onto the density matrices.
fn project_to_density(m: &CMat) -> CMat {
    let (vals, vecs) = linalg::hermitian_eigen(m);
    let projected = project_to_simplex(&vals);
    let d = m.nrows();
    let mut out = CMat::zeros(d, d);
    for (k, &p) in projected.iter().enumerate() {
        if p > 0.0 {
            let v = vecs.column(k);
            out += v * v.adjoint() * c(p, 0.0);
        }
    }
    out
}

/// Projection of a descending-sorted vector onto the probability simplex.
fn project_to_simplex(sorted_desc: &[f64]) -> Vec<f64> {
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (i, &v) in sorted_desc.iter().enumerate() {
        cumulative += v;
        let t = (cumulative - 1.0) / (i + 1) as f64;
        if v - t > 0.0 {
            theta = t;
        }
    }
    sorted_desc.iter().map(|&v| (v - theta).max(0.0)).collect()
}
