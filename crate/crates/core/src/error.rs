use thiserror::Error;

/// Errors produced by the operator calculus, the code constructions and the
/// concatenation engine.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected:?}, found {found:?}")]
    ShapeMismatch {
        context: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("dimension mismatch in {context}: {left} vs {right}")]
    DimensionMismatch {
        context: &'static str,
        left: usize,
        right: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("reference operator is not an isometry on the domain (deviation {deviation:e})")]
    NotIsometry { deviation: f64 },

    #[error(
        "error amplitude minimization did not converge after {iterations} iterations \
         (best upper bound {best:e}, lower bound {lower:e})"
    )]
    NoConvergence {
        best: f64,
        lower: f64,
        iterations: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("code `{0}` does not correct arbitrary single-qubit errors; refusing without test override")]
    NonQuantumCode(String),

    #[error("superoperator work {required} exceeds budget {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
}

pub type Result<T> = std::result::Result<T, Error>;
