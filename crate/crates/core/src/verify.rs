//! Randomized and exhaustive property suites for the operator calculus, the
//! residual-error bounds, the code and the resource counters.
//!
//! Every trial draws from its own ChaCha stream, so a report depends only on
//! `(trials, seed)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::amplitude::error_amplitude_value;
use crate::analysis;
use crate::ccp::Counters;
use crate::channels::ChannelSpec;
use crate::code::{self, five_qubit_code};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec};
use crate::oper::{self, GeneralizedOperator, SubspaceIsometry};
use crate::pauli::{Pauli, PauliString};

/// Slack for inequalities between error amplitudes.
pub const AMPLITUDE_SLACK: f64 = 1e-6;
/// Slack for strength comparisons.
pub const STRENGTH_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Lemmas,
    Bounds,
    Code,
    Counters,
    All,
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lemmas" => Ok(Suite::Lemmas),
            "bounds" => Ok(Suite::Bounds),
            "code" => Ok(Suite::Code),
            "counters" => Ok(Suite::Counters),
            "all" => Ok(Suite::All),
            other => Err(Error::Parse(format!(
                "unknown suite `{other}` (expected lemmas, bounds, code, counters or all)"
            ))),
        }
    }
}

/// Outcome of one property.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyResult {
    pub name: String,
    pub cases: usize,
    pub violations: usize,
    /// Smallest `bound - measured` seen (negative on violation).
    pub worst_margin: f64,
    /// Serialized inputs of the worst violating case.
    pub counterexample: Option<String>,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub properties: Vec<PropertyResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(PropertyResult::passed)
    }
}

/// One evaluated case: `margin >= 0` means the property holds.
struct Case {
    margin: f64,
    describe: Box<dyn FnOnce() -> String + Send>,
}

fn collect(name: &str, cases: Vec<Result<Case>>) -> Result<PropertyResult> {
    let mut out = PropertyResult {
        name: name.to_string(),
        cases: cases.len(),
        violations: 0,
        worst_margin: f64::INFINITY,
        counterexample: None,
    };
    let mut worst_violation: Option<Case> = None;
    for case in cases {
        let case = case?;
        out.worst_margin = out.worst_margin.min(case.margin);
        if case.margin < 0.0 || case.margin.is_nan() {
            out.violations += 1;
            if worst_violation.as_ref().is_none_or(|w| case.margin < w.margin) {
                worst_violation = Some(case);
            }
        }
    }
    out.counterexample = worst_violation.map(|c| (c.describe)());
    Ok(out)
}

fn stream(seed: u64, property: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ property.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(trial);
    rng
}

/// Random operators for the property suites.
pub mod random {
    use super::*;

    pub fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMat {
        CMat::from_fn(rows, cols, |_, _| {
            c(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
        })
    }

    /// Haar-distributed unitary (polar factor of a Ginibre matrix).
    pub fn unitary(rng: &mut impl Rng, dim: usize) -> CMat {
        linalg::polar_isometry(&gaussian_matrix(rng, dim, dim))
    }

    /// Random `dim x k` isometry.
    pub fn isometry(rng: &mut impl Rng, dim: usize, k: usize) -> SubspaceIsometry {
        let u = unitary(rng, dim);
        SubspaceIsometry::new(u.columns(0, k).into_owned()).expect("columns of a unitary")
    }

    /// Generalized unitary with `terms` Kraus terms near the unitary `u`:
    /// the stacked terms `[u + s G_0; s G_1; ...]` are orthonormalized.
    pub fn near_unitary(rng: &mut impl Rng, u: &CMat, terms: usize, scale: f64) -> GeneralizedOperator {
        let d = u.nrows();
        let mut stacked = CMat::zeros(d * terms, d);
        for k in 0..terms {
            let mut block = gaussian_matrix(rng, d, d) * c(scale, 0.0);
            if k == 0 {
                block += u;
            }
            stacked.view_mut((k * d, 0), (d, d)).copy_from(&block);
        }
        let v = linalg::polar_isometry(&stacked);
        let parts = (0..terms).map(|k| v.view((k * d, 0), (d, d)).into_owned()).collect();
        GeneralizedOperator::from_kraus(parts).expect("square terms")
    }

    /// Near-unitary operator on 1 or 2 qubits with 1..=3 terms and a random
    /// noise scale in `[0, 0.5)`.
    pub fn generalized_unitary(rng: &mut impl Rng, dim: usize) -> GeneralizedOperator {
        let u = unitary(rng, dim);
        perturbed(rng, &u)
    }

    /// [`near_unitary`] with 1..=3 terms and a noise scale in `[0, 0.5)`.
    pub fn perturbed(rng: &mut impl Rng, u: &CMat) -> GeneralizedOperator {
        let terms = rng.random_range(1..=3);
        let scale = rng.random_range(0.0..0.5);
        near_unitary(rng, u, terms, scale)
    }

    /// Unitary that maps the range of `sub` onto itself.
    pub fn preserving_unitary(rng: &mut impl Rng, sub: &SubspaceIsometry) -> CMat {
        let d = sub.ambient_dim();
        let k = sub.sub_dim();
        let inside = unitary(rng, k);
        let outside = if k < d { unitary(rng, d - k) } else { CMat::zeros(0, 0) };
        let mut block = CMat::zeros(d, d);
        block.view_mut((0, 0), (k, k)).copy_from(&inside);
        if k < d {
            block.view_mut((k, k), (d - k, d - k)).copy_from(&outside);
        }
        // frame whose first k columns span the subspace
        let mut frame = gaussian_matrix(rng, d, d);
        frame.view_mut((0, 0), (d, k)).copy_from(sub.columns());
        let q = gram_schmidt(&frame);
        &q * block * q.adjoint()
    }

    fn gram_schmidt(m: &CMat) -> CMat {
        let mut q = m.clone();
        for j in 0..q.ncols() {
            for i in 0..j {
                let proj = q.column(i).dotc(&q.column(j));
                let qi = q.column(i).into_owned();
                q.column_mut(j).axpy(-proj, &qi, c(1.0, 0.0));
            }
            let n = q.column(j).norm();
            q.column_mut(j).unscale_mut(n);
        }
        q
    }

    pub fn dimension(rng: &mut impl Rng) -> usize {
        if rng.random_bool(0.5) {
            2
        } else {
            4
        }
    }
}

fn text_of(label: &str, op: &GeneralizedOperator) -> String {
    format!("[{label}]\n{}", op.to_debug_text())
}

fn text_of_matrix(label: &str, m: &CMat) -> String {
    text_of(label, &GeneralizedOperator::from_matrix(m.clone()))
}

fn text_of_subspace(sub: &SubspaceIsometry) -> String {
    text_of_matrix("subspace", sub.columns())
}

/// Composition: `E(A2 A1 | C, B2 B1 | C) <= E(A1 | C, B1 | C) + E(A2 | C, B2 | C)`
/// when `B1 C = C`.
pub fn lemma_composition(trials: usize, seed: u64) -> Result<PropertyResult> {
    let cases = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let rng = &mut stream(seed, 22, t);
            let d = random::dimension(rng);
            let k = rng.random_range(1..=d);
            let sub = random::isometry(rng, d, k);
            let b1 = random::preserving_unitary(rng, &sub);
            let b2 = random::unitary(rng, d);
            let a1 = random::perturbed(rng, &b1);
            let a2 = random::perturbed(rng, &b2);
            let e1 = error_amplitude_value(&a1, &b1, Some(&sub))?;
            let e2 = error_amplitude_value(&a2, &b2, Some(&sub))?;
            let joint = error_amplitude_value(&a2.compose(&a1)?, &(&b2 * &b1), Some(&sub))?;
            Ok(Case {
                margin: e1 + e2 + AMPLITUDE_SLACK - joint,
                describe: Box::new(move || {
                    [text_of("a1", &a1), text_of("a2", &a2), text_of_matrix("b1", &b1), text_of_matrix("b2", &b2), text_of_subspace(&sub)]
                        .join("")
                }),
            })
        })
        .collect();
    collect("composition", cases)
}

/// Substitution: `E(B2 A | C, R | C) <= E(B2, B1) + E(B1 A | C, R | C)`.
pub fn lemma_substitution(trials: usize, seed: u64) -> Result<PropertyResult> {
    let cases = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let rng = &mut stream(seed, 23, t);
            let d = random::dimension(rng);
            let k = rng.random_range(1..=d);
            let sub = random::isometry(rng, d, k);
            let a = random::generalized_unitary(rng, d);
            let b1 = random::unitary(rng, d);
            let b2 = random::perturbed(rng, &b1);
            let reference = random::unitary(rng, d);
            let delta = error_amplitude_value(&b2, &b1, None)?;
            let b1_op = GeneralizedOperator::from_matrix(b1.clone());
            let before = error_amplitude_value(&b1_op.compose(&a)?, &reference, Some(&sub))?;
            let after = error_amplitude_value(&b2.compose(&a)?, &reference, Some(&sub))?;
            Ok(Case {
                margin: delta + before + AMPLITUDE_SLACK - after,
                describe: Box::new(move || {
                    [text_of("a", &a), text_of_matrix("b1", &b1), text_of("b2", &b2), text_of_matrix("r", &reference), text_of_subspace(&sub)]
                        .join("")
                }),
            })
        })
        .collect();
    collect("substitution", cases)
}

/// Restriction: strength does not grow under restriction, and tracing out an
/// ancilla does not increase the error amplitude.
pub fn lemma_restriction(trials: usize, seed: u64) -> Result<PropertyResult> {
    let cases = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let rng = &mut stream(seed, 24, t);
            // strength part, on an arbitrary (not necessarily unitary) operator
            let d = random::dimension(rng);
            let k = rng.random_range(1..=d);
            let sub = random::isometry(rng, d, k);
            let g = GeneralizedOperator::from_kraus(
                (0..rng.random_range(1..=3)).map(|_| random::gaussian_matrix(rng, d, d)).collect(),
            )?;
            let strength_margin = g.strength() + STRENGTH_SLACK * g.strength().max(1.0) - g.restrict(&sub)?.strength();

            // ancilla part: system qubit 0, ancilla qubit 1 prepared in |0>
            let u = random::unitary(rng, 2);
            let joint = random::perturbed(rng, &linalg::kron(&u, &linalg::identity(2)));
            let embed = SubspaceIsometry::new(CMat::from_fn(4, 2, |r, col| if r == 2 * col { c(1.0, 0.0) } else { c(0.0, 0.0) }))?;
            let e_joint = error_amplitude_value(&joint, &linalg::kron(&u, &linalg::identity(2)), Some(&embed))?;
            let induced = joint.restrict(&embed)?.trace_out_tail(2, 1)?;
            let e_induced = error_amplitude_value(&induced, &u, None)?;
            let trace_margin = e_joint + AMPLITUDE_SLACK - e_induced;
            Ok(Case {
                margin: strength_margin.min(trace_margin),
                describe: Box::new(move || {
                    [text_of("g", &g), text_of_subspace(&sub), text_of("joint", &joint), text_of_matrix("u", &u)].join("")
                }),
            })
        })
        .collect();
    collect("restriction", cases)
}

/// Strength of a tensor product is the product of strengths.
pub fn tensor_strength(trials: usize, seed: u64) -> Result<PropertyResult> {
    let cases = (0..trials as u64)
        .map(|t| {
            let rng = &mut stream(seed, 25, t);
            let mk = |rng: &mut ChaCha8Rng| {
                GeneralizedOperator::from_kraus((0..rng.random_range(1..=2)).map(|_| random::gaussian_matrix(rng, 2, 2)).collect())
            };
            let (a, b) = (mk(rng)?, mk(rng)?);
            let prod = a.strength() * b.strength();
            let err = (a.tensor(&b).strength() - prod).abs();
            Ok(Case {
                margin: 1e-10 * prod.max(1.0) - err,
                describe: Box::new(move || [text_of("a", &a), text_of("b", &b)].join("")),
            })
        })
        .collect();
    collect("tensor_strength", cases)
}

pub fn lemmas(trials: usize, seed: u64) -> Result<Vec<PropertyResult>> {
    Ok(vec![
        lemma_composition(trials, seed)?,
        lemma_substitution(trials, seed)?,
        lemma_restriction(trials, seed)?,
        tensor_strength(trials, seed)?,
    ])
}

/// Residual error of the five-qubit code after one ideal recovery, against
/// `sum_{i=2}^{5} C(5, i) eps^i`, for dephasing and a coherent rotation.
pub fn residual_bound_grid(epsilons: &[f64]) -> Result<PropertyResult> {
    let code = five_qubit_code();
    let mut cases = Vec::new();
    for &eps in epsilons {
        let bound = analysis::bound_residual(5, 1, eps)?.exact_sum;
        let channels = [ChannelSpec::dephasing(eps * eps)?, ChannelSpec::rotation([0.0, 0.0, 1.0], 2.0 * eps.asin())?];
        for spec in channels {
            let measured = code::residual_after_recovery(&code, &spec.build())?;
            cases.push(Ok(Case {
                margin: bound + AMPLITUDE_SLACK - measured,
                describe: Box::new(move || format!("channel {spec}, eps {eps}, measured {measured}, bound {bound}\n")),
            }));
        }
    }
    collect("residual_bound", cases)
}

/// The simplified bound dominates the exact sum wherever it is declared valid.
pub fn simplified_bound_grid() -> Result<PropertyResult> {
    let mut cases = Vec::new();
    for l in 1..=7 {
        for e in 0..l {
            for k in 1..=50 {
                let eps = 0.01 * k as f64;
                let b = analysis::bound_residual(l, e, eps)?;
                if b.simplified_valid {
                    cases.push(Ok(Case {
                        margin: b.simplified * (1.0 + 1e-12) - b.exact_sum,
                        describe: Box::new(move || format!("l {l}, e {e}, eps {eps}: {b:?}\n")),
                    }));
                }
            }
        }
    }
    collect("simplified_bound", cases)
}

pub fn bounds() -> Result<Vec<PropertyResult>> {
    Ok(vec![residual_bound_grid(&[0.01, 0.05, 0.1])?, simplified_bound_grid()?])
}

/// The logical states `|0_L>, |1_L>, |+_L>, |-_L>`.
pub fn logical_test_states(code: &code::CodeSpec) -> Vec<(&'static str, CVec)> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    vec![
        ("0", code.logical_zero().clone()),
        ("1", code.logical_one().clone()),
        ("+", code.logical_state(c(h, 0.0), c(h, 0.0))),
        ("-", code.logical_state(c(h, 0.0), c(-h, 0.0))),
    ]
}

/// Every weight-one Pauli on every logical test state is recovered, and the
/// decoder returns `|i>|0000>` for corrupted basis states.
pub fn code_correctability() -> Result<Vec<PropertyResult>> {
    let code = five_qubit_code();
    let l = code.length();
    let mut recovery_cases = Vec::new();
    let mut decoder_cases = Vec::new();
    for q in 0..l {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let err = PauliString::single(l, q, p).matrix();
            for (label, psi) in logical_test_states(&code) {
                let rho = oper::pure_density(&(&err * &psi));
                let f = oper::fidelity_with_pure(&code.recovery().apply_to_density(&rho)?, &psi);
                recovery_cases.push(Ok(Case {
                    margin: f - (1.0 - 1e-10),
                    describe: Box::new(move || format!("{p:?} on qubit {q}, state |{label}_L>: fidelity {f}\n")),
                }));
            }
            for i in 0..2 {
                let psi = if i == 0 { code.logical_zero() } else { code.logical_one() };
                let rho = oper::pure_density(&(&err * psi));
                let target = linalg::basis(1 << l, i << (l - 1));
                let f = oper::fidelity_with_pure(&code.decoder().apply_to_density(&rho)?, &target);
                decoder_cases.push(Ok(Case {
                    margin: f - (1.0 - 1e-10),
                    describe: Box::new(move || format!("decoder, {p:?} on qubit {q}, |{i}_L>: fidelity {f}\n")),
                }));
            }
        }
    }
    let mut seen = std::collections::BTreeMap::new();
    let mut syndrome_cases = Vec::new();
    for q in 0..l {
        for p in [Pauli::X, Pauli::Y, Pauli::Z] {
            let s = code.syndrome_of(&PauliString::single(l, q, p));
            let clash = seen.insert(s, (q, p));
            syndrome_cases.push(Ok(Case {
                margin: if s != 0 && clash.is_none() { 1.0 } else { -1.0 },
                describe: Box::new(move || format!("{p:?} on qubit {q} has syndrome {s}, shared with {clash:?}\n")),
            }));
        }
    }
    Ok(vec![
        collect("recovery_fidelity", recovery_cases)?,
        collect("decoder_fidelity", decoder_cases)?,
        collect("distinct_syndromes", syndrome_cases)?,
    ])
}

/// Accumulated counters equal the closed forms for `r in {2,3}`,
/// `l in {3,5}`, `h in 1..=4`.
pub fn counters() -> Result<Vec<PropertyResult>> {
    let mut cases = Vec::new();
    for r in [2, 3] {
        for l in [3, 5] {
            for (k, acc) in Counters::levels(r, l, 4).into_iter().enumerate() {
                let h = k + 1;
                let o = analysis::overhead(r, l, h)?;
                let same = acc.n == o.n && acc.qubits == o.qubits && acc.parallel_ops == o.parallel_ops && acc.total_ops == o.total_ops;
                cases.push(Ok(Case {
                    margin: if same { 0.0 } else { -1.0 },
                    describe: Box::new(move || format!("r {r}, l {l}, h {h}: accumulated {acc:?}, closed form {o:?}\n")),
                }));
            }
        }
    }
    Ok(vec![collect("counters", cases)?])
}

pub fn run(suite: Suite, trials: usize, seed: u64) -> Result<VerifyReport> {
    let mut properties = Vec::new();
    let all = suite == Suite::All;
    if all || suite == Suite::Lemmas {
        properties.extend(lemmas(trials, seed)?);
    }
    if all || suite == Suite::Bounds {
        properties.extend(bounds()?);
    }
    if all || suite == Suite::Code {
        properties.extend(code_correctability()?);
    }
    if all || suite == Suite::Counters {
        properties.extend(counters()?);
    }
    Ok(VerifyReport { properties })
}
