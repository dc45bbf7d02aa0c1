//! Closed-form results: residual-error bound, overhead, the five-qubit
//! composite error and the threshold constraint solver.
//!
//! The threshold solver and the overhead counts are exact (`BigRational`,
//! `BigUint`).

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Residual error of a code correcting `e` errors on `l` qubits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualBound {
    /// `sum_{i=e+1}^{l} C(l, i) eps^i`.
    pub exact_sum: f64,
    /// `2 C(l, e+1) eps^{e+1}`.
    pub simplified: f64,
    /// Whether `eps <= (e+2) / (2 (l-e-1))`, so that `simplified` bounds `exact_sum`.
    pub simplified_valid: bool,
}

pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn bound_residual(l: usize, e: usize, eps: f64) -> Result<ResidualBound> {
    if e >= l {
        return Err(Error::InvalidArgument(format!("need 0 <= e < l, got e = {e}, l = {l}")));
    }
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("eps = {eps} outside [0, 1]")));
    }
    let (l64, e64) = (l as u64, e as u64);
    let exact_sum = (e64 + 1..=l64).map(|i| binomial(l64, i) * eps.powi(i as i32)).sum();
    let simplified = 2.0 * binomial(l64, e64 + 1) * eps.powi(e as i32 + 1);
    let spare = l - e - 1;
    let simplified_valid = spare == 0 || eps <= (e + 2) as f64 / (2 * spare) as f64;
    Ok(ResidualBound { exact_sum, simplified, simplified_valid })
}

/// Resource counts of `CCP_{r,h}` for an `l`-qubit code.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverheadReport {
    #[serde(serialize_with = "ser_big")]
    pub n: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub qubits: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub parallel_ops: BigUint,
    #[serde(serialize_with = "ser_big")]
    pub total_ops: BigUint,
    /// `log_r l`, so that `qubits = n^delta`.
    pub delta: f64,
}

fn ser_big<S: serde::Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn overhead(r: usize, l: usize, h: usize) -> Result<OverheadReport> {
    if r < 2 || l < 2 || h < 1 {
        return Err(Error::InvalidArgument(format!("need r >= 2, l >= 2, h >= 1; got r = {r}, l = {l}, h = {h}")));
    }
    let pow = |b: usize| num_traits::pow(BigUint::from(b), h);
    let one = BigUint::one();
    let rp1 = BigUint::from(r + 1);
    let report = OverheadReport {
        n: pow(r),
        qubits: pow(l),
        parallel_ops: &rp1 * (pow(r) - &one) / BigUint::from(r - 1),
        total_ops: &rp1 * (pow(r * l) - &one) / BigUint::from(r * l - 1),
        delta: (l as f64).ln() / (r as f64).ln(),
    };
    assert!(&report.parallel_ops * BigUint::from(r - 1) < pow(r) * &rp1);
    assert!(report.total_ops <= pow(r * l));
    Ok(report)
}

/// Composite error `30 eps_p + 20 eps_d^2` of one five-qubit block, with the
/// flag `eps_d <= 1/2` under which it is valid.
pub fn fivequbit_eps_c(eps_p: f64, eps_d: f64) -> (f64, bool) {
    (30.0 * eps_p + 20.0 * eps_d * eps_d, eps_d <= 0.5)
}

pub fn fivequbit_eps_c_exact(eps_p: &BigRational, eps_d: &BigRational) -> BigRational {
    rat(30, 1) * eps_p + rat(20, 1) * eps_d * eps_d
}

/// `(r + 1) eps_c <= eps_d`; `eps_c = 0` counts as satisfied.
pub fn check_assumption4(r: usize, eps_c: f64, eps_d: f64) -> bool {
    eps_c == 0.0 || (r as f64 + 1.0) * eps_c <= eps_d
}

pub fn check_assumption4_exact(r: usize, eps_c: &BigRational, eps_d: &BigRational) -> bool {
    eps_c.is_zero() || rat(r as i64 + 1, 1) * eps_c <= *eps_d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// The memory error is capped at its optimum; larger targets give nothing.
    Saturated,
    /// The memory error equals the target.
    Linear,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::Saturated => "saturated",
            Regime::Linear => "linear",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub r: usize,
    #[serde(serialize_with = "ser_rat")]
    pub epsilon: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub eps_d: BigRational,
    #[serde(serialize_with = "ser_rat")]
    pub eps_p: BigRational,
    /// `eps_p / epsilon`.
    #[serde(serialize_with = "ser_rat")]
    pub c: BigRational,
    pub regime: Regime,
}

fn ser_rat<S: serde::Serializer>(v: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Parses `a/b`, an integer, or a decimal such as `0.0125`, exactly.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let bad = || Error::Parse(format!("not a rational number: `{text}`"));
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if frac.contains(['-', '+']) || (int.is_empty() && frac.is_empty()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let n: BigInt = digits.parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

pub fn rational_to_f64(v: &BigRational) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Coefficients `(a, b)` of `eps_c = a eps_p + b eps_d^2` after `r + 1`
/// compositions of the five-qubit block error.
fn coefficients(r: usize) -> (BigRational, BigRational) {
    let k = r as i64 + 1;
    (rat(30 * k, 1), rat(20 * k, 1))
}

/// Constraints on `(epsilon, eps_d, eps_p)` for repetition factor `r`:
/// `eps_d <= 1/2`, `epsilon >= a eps_p + b eps_d^2`, `eps_d >= a eps_p + b eps_d^2`.
pub fn constraints_hold(r: usize, epsilon: &BigRational, eps_d: &BigRational, eps_p: &BigRational) -> bool {
    let (a, b) = coefficients(r);
    let load = &a * eps_p + &b * eps_d * eps_d;
    !eps_p.is_negative() && !eps_d.is_negative() && *eps_d <= rat(1, 2) && *epsilon >= load && *eps_d >= load
}

/// Largest primitive-gate error allowed for final error `epsilon` with `r = 2`.
pub fn threshold_solve(epsilon: &BigRational) -> Result<ThresholdReport> {
    solve(epsilon, 2)
}

/// [`threshold_solve`] with the coefficients scaled to `r + 1` recoveries.
/// An extrapolation: only `r = 2` is backed by the block error estimate.
pub fn threshold_solve_general(epsilon: &BigRational, r: usize) -> Result<ThresholdReport> {
    if r < 2 {
        return Err(Error::InvalidArgument(format!("repetition factor r = {r} < 2")));
    }
    solve(epsilon, r)
}

fn solve(epsilon: &BigRational, r: usize) -> Result<ThresholdReport> {
    if !epsilon.is_positive() {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let (a, b) = coefficients(r);
    // eps_d - b eps_d^2 peaks at 1 / (2b); beyond epsilon the first constraint binds
    let peak = BigRational::one() / (rat(2, 1) * &b);
    let (eps_d, regime) = if *epsilon >= peak { (peak, Regime::Saturated) } else { (epsilon.clone(), Regime::Linear) };
    let eps_p = (&eps_d - &b * &eps_d * &eps_d) / &a;
    let c = &eps_p / epsilon;
    Ok(ThresholdReport { r, epsilon: epsilon.clone(), eps_d, eps_p, c, regime })
}

/// The closed form `epsilon (1 - 60 epsilon^2) / 90` as printed for the
/// linear regime. It differs from the constraint optimum
/// `epsilon (1 - 60 epsilon) / 90` and violates `eps_d >= 90 eps_p + 60 eps_d^2`.
pub fn eps_p_verbatim(epsilon: &BigRational) -> BigRational {
    epsilon * (BigRational::one() - rat(60, 1) * epsilon * epsilon) / rat(90, 1)
}

/// Squared amplitude: the heuristic error probability of an amplitude.
pub fn amplitude_to_probability(eps: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::InvalidArgument(format!("amplitude {eps} outside [0, 1]")));
    }
    Ok(eps * eps)
}
