//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use concatqec::linalg::{c, CMat, CVec};
use concatqec::{CodeSpec, Pauli, PauliString};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest eigenvalue of a Hermitian matrix, closed form for 2x2.
pub fn lambda_max(m: &CMat) -> f64 {
    if m.nrows() == 2 {
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = m[(0, 1)];
        return 0.5 * (a + d) + (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    }
    let h = (m + m.adjoint()) * c(0.5, 0.0);
    nalgebra::SymmetricEigen::new(h).eigenvalues.max()
}

/// Error-amplitude objective `sqrt(lambda_max(M(mu)))` with
/// `M(mu) = S - sum_k (conj(mu_k) C_k + mu_k C_k^†) + |mu|^2 B^† B`, where
/// `S = sum_k A_k^† A_k` and `C_k = B^† A_k`, precomputed.
struct Gram {
    s: CMat,
    cs: Vec<CMat>,
    bb: CMat,
}

impl Gram {
    fn new(terms: &[CMat], b: &CMat) -> Self {
        let d = b.ncols();
        let mut s = CMat::zeros(d, d);
        for a in terms {
            s += a.adjoint() * a;
        }
        Gram { s, cs: terms.iter().map(|a| b.adjoint() * a).collect(), bb: b.adjoint() * b }
    }

    fn value(&self, mu: &[f64]) -> f64 {
        let mut m = self.s.clone();
        let mut norm = 0.0;
        for (k, ck) in self.cs.iter().enumerate() {
            let z = c(mu[2 * k], mu[2 * k + 1]);
            norm += z.norm_sqr();
            m -= ck * z.conj() + ck.adjoint() * z;
        }
        m += &self.bb * c(norm, 0.0);
        lambda_max(&m).max(0.0).sqrt()
    }

    /// `g(rho) = tr(rho S) - sum_k |tr(rho C_k)|^2`, the concave dual of the
    /// objective for a unitary reference, at the Bloch vector with spherical
    /// coordinates `(t, theta, phi)`.
    fn dual(&self, x: &[f64; 3]) -> f64 {
        let [t, th, ph] = *x;
        let (r0, r1, r2) = (t * th.sin() * ph.cos(), t * th.sin() * ph.sin(), t * th.cos());
        // tr(rho X) for rho = (I + r.sigma)/2
        let tr = |m: &CMat| {
            0.5 * ((m[(0, 0)] + m[(1, 1)])
                + (m[(0, 1)] + m[(1, 0)]) * r0
                + (m[(0, 1)] - m[(1, 0)]) * c(0.0, r1)
                + (m[(0, 0)] - m[(1, 1)]) * r2)
        };
        tr(&self.s).re - self.cs.iter().map(|ck| tr(ck).norm_sqr()).sum::<f64>()
    }
}

fn in_ball(mu: &[f64]) -> bool {
    mu.iter().map(|v| v * v).sum::<f64>() <= 1.0 + 1e-12
}

/// Brute-force minimum of the error-amplitude objective over `|mu| <= 1`:
/// a full grid (step 1e-3 for one Kraus term, coarser for two), then
/// local grids shrinking to step 1e-9 around the incumbent.
pub fn grid_amplitude(terms: &[CMat], b: &CMat) -> f64 {
    let gram = Gram::new(terms, b);
    let dims = 2 * terms.len();
    assert!(dims <= 4, "grid oracle handles at most two Kraus terms");
    let step: f64 = if dims == 2 { 1e-3 } else { 0.04 };
    let n = (2.0 / step).round() as i64;
    let mut best = (f64::INFINITY, vec![0.0; dims]);
    let mut idx = vec![0i64; dims];
    loop {
        let mu: Vec<f64> = idx.iter().map(|&i| -1.0 + i as f64 * step).collect();
        if in_ball(&mu) {
            let v = gram.value(&mu);
            if v < best.0 {
                best = (v, mu);
            }
        }
        let mut k = 0;
        while k < dims {
            idx[k] += 1;
            if idx[k] <= n {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == dims {
            break;
        }
    }
    let rng = &mut ChaCha8Rng::seed_from_u64(0x5eed);
    let mut h = step;
    while h > 1e-9 {
        let mut improved = true;
        while improved {
            improved = false;
            let centre = best.1.clone();
            let mut offs = vec![-2i64; dims];
            loop {
                let mu: Vec<f64> = centre.iter().zip(&offs).map(|(m, &o)| m + o as f64 * h).collect();
                if in_ball(&mu) {
                    let v = gram.value(&mu);
                    if v < best.0 - 1e-15 {
                        best = (v, mu);
                        improved = true;
                    }
                }
                let mut k = 0;
                while k < dims {
                    offs[k] += 1;
                    if offs[k] <= 2 {
                        break;
                    }
                    offs[k] = -2;
                    k += 1;
                }
                if k == dims {
                    break;
                }
            }
        }
        // random directions get past kinks where eigenvalues cross
        for _ in 0..400 {
            let dir: Vec<f64> = (0..dims).map(|_| rng.random_range(-1.0..1.0)).collect();
            let len = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            for scale in [h, 4.0 * h, 16.0 * h] {
                let mu: Vec<f64> = best.1.iter().zip(&dir).map(|(m, d)| m + d / len * scale).collect();
                if in_ball(&mu) {
                    let v = gram.value(&mu);
                    if v < best.0 - 1e-15 {
                        best = (v, mu);
                    }
                }
            }
        }
        h *= 0.5;
    }
    best.0
}

/// Brute-force maximum of the dual over the Bloch ball in spherical
/// coordinates (grid step 0.02, then shrinking local grids down to 1e-10).
/// The dual is smooth, so the local search cannot stall the way it can on
/// the kinks of the primal; by duality `sqrt` of the maximum is the amplitude.
pub fn dual_grid_amplitude(terms: &[CMat], b: &CMat) -> f64 {
    use std::f64::consts::PI;
    let gram = Gram::new(terms, b);
    let hi = [1.0, PI, 2.0 * PI];
    let step = 0.02;
    let mut best = (f64::NEG_INFINITY, [0.0; 3]);
    let counts = hi.map(|h: f64| (h / step).ceil() as usize);
    for i in 0..=counts[0] {
        for j in 0..=counts[1] {
            for k in 0..=counts[2] {
                let x = [(i as f64 * step).min(1.0), (j as f64 * step).min(PI), k as f64 * step];
                let g = gram.dual(&x);
                if g > best.0 {
                    best = (g, x);
                }
            }
        }
    }
    let mut h = step;
    while h > 1e-10 {
        let mut improved = true;
        while improved {
            improved = false;
            let centre = best.1;
            for di in -1..=1 {
                for dj in -1..=1 {
                    for dk in -1..=1 {
                        let x = [
                            (centre[0] + di as f64 * h).clamp(0.0, 1.0),
                            (centre[1] + dj as f64 * h).clamp(0.0, PI),
                            centre[2] + dk as f64 * h,
                        ];
                        let g = gram.dual(&x);
                        if g > best.0 + 1e-16 {
                            best = (g, x);
                            improved = true;
                        }
                    }
                }
            }
        }
        h *= 0.5;
    }
    best.0.max(0.0).sqrt()
}

/// Choi matrix `sum_{ij} <a_i|a_j> vec(A_j) vec(A_i)^†` straight from raw pairs.
pub fn choi_from_raw(raw: &[(CVec, CMat)]) -> CMat {
    let vecs: Vec<CVec> = raw
        .iter()
        .map(|(_, m)| CVec::from_iterator(m.len(), m.iter().copied()))
        .collect();
    let n = vecs[0].len();
    let mut out = CMat::zeros(n, n);
    for (i, (ai, _)) in raw.iter().enumerate() {
        for (j, (aj, _)) in raw.iter().enumerate() {
            out += &vecs[j] * vecs[i].adjoint() * ai.dotc(aj);
        }
    }
    out
}

/// Logical class of a residual frame after ideal recovery.
fn logical_of(code: &CodeSpec, f: &PauliString) -> Pauli {
    let x = !f.commutes_with(&code.logical_z());
    let z = !f.commutes_with(&code.logical_x());
    Pauli::from_bits(x, z)
}

fn recover(code: &CodeSpec, f: &PauliString) -> PauliString {
    f.mul(&code.syndrome_table()[f.syndrome(code.stabilizers())])
}

fn key(f: &PauliString) -> usize {
    ((f.x_mask() as usize) << f.num_qubits()) | f.z_mask() as usize
}

/// Exact distribution of the residual logical Pauli of one ideal-gate block
/// with i.i.d. wait faults `(px, py, pz)`, by propagating the full frame
/// distribution period by period.
pub fn exact_block_pauli(code: &CodeSpec, probs: [f64; 3], r: usize) -> [f64; 4] {
    let l = code.length();
    let single = [1.0 - probs.iter().sum::<f64>(), probs[0], probs[1], probs[2]];
    let mut dist = vec![0.0; 1 << (2 * l)];
    dist[0] = 1.0;
    for period in 0..r {
        for q in 0..l {
            let mut next = vec![0.0; dist.len()];
            for (k, &w) in dist.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let f = PauliString::from_masks(l, (k >> l) as u32, (k & ((1 << l) - 1)) as u32);
                for (p, &pp) in Pauli::ALL.iter().zip(&single) {
                    let g = f.mul(&PauliString::single(l, q, *p));
                    next[key(&g)] += w * pp;
                }
            }
            dist = next;
        }
        if period + 1 < r {
            let mut next = vec![0.0; dist.len()];
            for (k, &w) in dist.iter().enumerate() {
                let f = PauliString::from_masks(l, (k >> l) as u32, (k & ((1 << l) - 1)) as u32);
                next[key(&recover(code, &f))] += w;
            }
            dist = next;
        }
    }
    let mut out = [0.0; 4];
    for (k, &w) in dist.iter().enumerate() {
        let f = PauliString::from_masks(l, (k >> l) as u32, (k & ((1 << l) - 1)) as u32);
        out[logical_of(code, &recover(code, &f)).index()] += w;
    }
    out
}

/// Residual logical Pauli over every configuration of at most two wait
/// faults among the `l r` slots, each weighted by its exact probability.
/// Configurations with three or more faults are dropped, so the weights sum
/// to the probability of at most two faults.
pub fn two_fault_block_pauli(code: &CodeSpec, probs: [f64; 3], r: usize) -> [f64; 4] {
    let l = code.length();
    let slots = l * r;
    let p_total: f64 = probs.iter().sum();
    let faults = [(Pauli::X, probs[0]), (Pauli::Y, probs[1]), (Pauli::Z, probs[2])];
    let run = |placed: &[(usize, Pauli)]| -> Pauli {
        let mut f = PauliString::identity(l);
        for period in 0..r {
            for &(slot, p) in placed {
                if slot / l == period {
                    f = f.mul(&PauliString::single(l, slot % l, p));
                }
            }
            if period + 1 < r {
                f = recover(code, &f);
            }
        }
        logical_of(code, &recover(code, &f))
    };
    let mut out = [0.0; 4];
    out[0] += (1.0 - p_total).powi(slots as i32);
    for s1 in 0..slots {
        for &(p1, w1) in &faults {
            let w = w1 * (1.0 - p_total).powi(slots as i32 - 1);
            out[run(&[(s1, p1)]).index()] += w;
            for s2 in s1 + 1..slots {
                for &(p2, w2) in &faults {
                    let w = w1 * w2 * (1.0 - p_total).powi(slots as i32 - 2);
                    out[run(&[(s1, p1), (s2, p2)]).index()] += w;
                }
            }
        }
    }
    out
}
