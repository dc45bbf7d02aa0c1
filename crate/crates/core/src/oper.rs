//! Generalized operators: linear maps paired with an orthonormal environment.
//!
//! A generalized operator `A = sum_k e_k (x) A_k` is stored through its
//! system parts `A_k` only, with the environment basis `e_k` orthonormal.
//! Arbitrary (non-orthonormal) environment vectors are accepted by
//! [`GeneralizedOperator::canonicalize`], which re-expresses them over an
//! orthonormal basis obtained from their Gram matrix.
//!
//! In this form the action on density matrices is `rho -> sum_k A_k rho A_k^†`
//! and the strength is `sqrt(lambda_max(sum_k A_k^† A_k))`.
//!
//! Two operators are treated as equivalent when their Choi matrices agree.
//! This is the computable form of "same effect on every density matrix".

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec};

/// Frobenius-norm cutoff below which Kraus terms are pruned.
pub const ZERO_CUTOFF: f64 = 1e-12;
/// Eigenvalue cutoff when extracting Kraus terms from a Gram or Choi matrix.
pub const EIGEN_CUTOFF: f64 = 1e-12;
/// Tolerance for `sum_k A_k^† A_k = I`.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct GeneralizedOperator {
    terms: Vec<CMat>,
    dim_in: usize,
    dim_out: usize,
}

impl GeneralizedOperator {
    /// Builds an operator from Kraus terms that already refer to an
    /// orthonormal environment basis. Terms below [`ZERO_CUTOFF`] are pruned.
    pub fn from_kraus(terms: Vec<CMat>) -> Result<Self> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("operator needs at least one term".into()))?;
        let (dim_out, dim_in) = first.shape();
        Self::from_kraus_with_dims(terms, dim_in, dim_out)
    }

    /// Like [`from_kraus`](Self::from_kraus) but allows an empty term list
    /// (the zero operator) of known shape.
    pub fn from_kraus_with_dims(terms: Vec<CMat>, dim_in: usize, dim_out: usize) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidArgument("dimensions must be positive".into()));
        }
        for t in &terms {
            if t.shape() != (dim_out, dim_in) {
                return Err(Error::ShapeMismatch {
                    context: "kraus term",
                    expected: (dim_out, dim_in),
                    found: t.shape(),
                });
            }
        }
        let terms = terms
            .into_iter()
            .filter(|t| linalg::frobenius_norm(t) >= ZERO_CUTOFF)
            .collect();
        Ok(Self {
            terms,
            dim_in,
            dim_out,
        })
    }

    /// A single-term operator `1 (x) U`.
    pub fn from_matrix(m: CMat) -> Self {
        let (dim_out, dim_in) = m.shape();
        Self::from_kraus_with_dims(vec![m], dim_in, dim_out).expect("single matrix is well formed")
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_matrix(linalg::identity(dim))
    }

    /// Re-expresses `sum_i a_i (x) A_i` over an orthonormal environment basis.
    ///
    /// With environment Gram matrix `G_ij = <a_i|a_j> = sum_k l_k v_k[i] conj(v_k[j])`
    /// the canonical terms are `B_k = sqrt(l_k) sum_j conj(v_k[j]) A_j`.
    pub fn canonicalize(raw: &[(CVec, CMat)]) -> Result<Self> {
        let (env0, m0) = raw
            .first()
            .ok_or_else(|| Error::InvalidArgument("canonicalize needs at least one pair".into()))?;
        let env_dim = env0.len();
        let (dim_out, dim_in) = m0.shape();
        for (env, m) in raw {
            if env.len() != env_dim {
                return Err(Error::DimensionMismatch {
                    context: "environment vector",
                    left: env_dim,
                    right: env.len(),
                });
            }
            if m.shape() != (dim_out, dim_in) {
                return Err(Error::ShapeMismatch {
                    context: "canonicalize",
                    expected: (dim_out, dim_in),
                    found: m.shape(),
                });
            }
        }
        let n = raw.len();
        let gram = CMat::from_fn(n, n, |i, j| raw[i].0.dotc(&raw[j].0));
        let (vals, vecs) = linalg::hermitian_eigen(&gram);
        let mut terms = Vec::new();
        for (k, &lambda) in vals.iter().enumerate() {
            if lambda <= EIGEN_CUTOFF {
                continue;
            }
            let mut b = CMat::zeros(dim_out, dim_in);
            for (j, (_, a)) in raw.iter().enumerate() {
                b += a * vecs[(j, k)].conj();
            }
            terms.push(b * c(lambda.sqrt(), 0.0));
        }
        Self::from_kraus_with_dims(terms, dim_in, dim_out)
    }

    pub fn terms(&self) -> &[CMat] {
        &self.terms
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    /// `M = sum_k A_k^† A_k`, the Gram matrix of the output over input states.
    pub fn strength_gram(&self) -> CMat {
        let mut m = CMat::zeros(self.dim_in, self.dim_in);
        for a in &self.terms {
            m += a.adjoint() * a;
        }
        m
    }

    /// Maximum of `|A psi|` over unit `psi`.
    pub fn strength(&self) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        linalg::lambda_max(&self.strength_gram()).max(0.0).sqrt()
    }

    /// Output length `|A psi|` for a (not necessarily normalized) state.
    pub fn apply_norm(&self, psi: &CVec) -> f64 {
        self.terms
            .iter()
            .map(|a| (a * psi).norm_squared())
            .sum::<f64>()
            .sqrt()
    }

    pub fn unitarity_defect(&self) -> f64 {
        let m = self.strength_gram() - linalg::identity(self.dim_in);
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Whether `sum_k A_k^† A_k = I` within [`UNITARY_TOL`].
    pub fn is_generalized_unitary(&self) -> bool {
        self.unitarity_defect() <= UNITARY_TOL
    }

    pub fn apply_to_density(&self, rho: &CMat) -> Result<CMat> {
        if rho.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::ShapeMismatch {
                context: "density matrix",
                expected: (self.dim_in, self.dim_in),
                found: rho.shape(),
            });
        }
        let mut out = CMat::zeros(self.dim_out, self.dim_out);
        for a in &self.terms {
            out += a * rho * a.adjoint();
        }
        Ok(out)
    }

    /// `self ∘ first`: apply `first`, then `self`, with independent environments.
    pub fn compose(&self, first: &GeneralizedOperator) -> Result<Self> {
        if first.dim_out != self.dim_in {
            return Err(Error::DimensionMismatch {
                context: "compose",
                left: self.dim_in,
                right: first.dim_out,
            });
        }
        let mut terms = Vec::with_capacity(self.terms.len() * first.terms.len());
        for a in &self.terms {
            for b in &first.terms {
                terms.push(a * b);
            }
        }
        Self::from_kraus_with_dims(terms, first.dim_in, self.dim_out)
    }

    pub fn tensor(&self, other: &GeneralizedOperator) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                terms.push(linalg::kron(a, b));
            }
        }
        Self::from_kraus_with_dims(
            terms,
            self.dim_in * other.dim_in,
            self.dim_out * other.dim_out,
        )
        .expect("kronecker shapes are consistent")
    }

    /// `A ↾ C`: precompose every term with the isometry onto the subspace.
    pub fn restrict(&self, sub: &SubspaceIsometry) -> Result<Self> {
        if sub.ambient_dim() != self.dim_in {
            return Err(Error::DimensionMismatch {
                context: "restrict",
                left: self.dim_in,
                right: sub.ambient_dim(),
            });
        }
        let terms = self.terms.iter().map(|a| a * sub.columns()).collect();
        Self::from_kraus_with_dims(terms, sub.sub_dim(), self.dim_out)
    }

    /// Choi matrix `sum_k vec(A_k) vec(A_k)^†` with column-stacking `vec`.
    ///
    /// Entry `[(c, r), (c', r')]` (index `c * dim_out + r`) equals
    /// `A(|c><c'|)[r, r']`.
    pub fn choi(&self) -> CMat {
        let d = self.dim_in * self.dim_out;
        let mut out = CMat::zeros(d, d);
        for a in &self.terms {
            let v = linalg::vectorize(a);
            out += &v * v.adjoint();
        }
        out
    }

    /// Extracts a minimal Kraus representation from a Choi matrix.
    pub fn from_choi(choi: &CMat, dim_in: usize, dim_out: usize) -> Result<Self> {
        let d = dim_in * dim_out;
        if choi.shape() != (d, d) {
            return Err(Error::ShapeMismatch {
                context: "choi",
                expected: (d, d),
                found: choi.shape(),
            });
        }
        let (vals, vecs) = linalg::hermitian_eigen(choi);
        let terms = vals
            .iter()
            .enumerate()
            .take_while(|(_, &l)| l > EIGEN_CUTOFF)
            .map(|(k, &l)| {
                let v: CVec = vecs.column(k).into_owned() * c(l.sqrt(), 0.0);
                linalg::unvectorize(&v, dim_out, dim_in)
            })
            .collect();
        Self::from_kraus_with_dims(terms, dim_in, dim_out)
    }

    /// Equivalent operator with the minimal number of Kraus terms.
    ///
    /// Uses the `K x K` Gram matrix `tr(A_i^† A_j)` or the Choi matrix,
    /// whichever is smaller; both share their nonzero spectrum.
    pub fn compact(&self) -> Self {
        let k = self.terms.len();
        let d = self.dim_in * self.dim_out;
        if k <= 1 {
            return self.clone();
        }
        if d < k {
            return Self::from_choi(&self.choi(), self.dim_in, self.dim_out)
                .expect("choi of a well-formed operator");
        }
        let gram = CMat::from_fn(k, k, |i, j| {
            self.terms[i]
                .iter()
                .zip(self.terms[j].iter())
                .map(|(x, y)| x.conj() * y)
                .sum()
        });
        let (vals, vecs) = linalg::hermitian_eigen(&gram);
        // B_k = sum_j U_jk A_j with U the eigenvectors; ‖B_k‖_F^2 is the k-th eigenvalue
        let terms = vals
            .iter()
            .enumerate()
            .take_while(|(_, &l)| l > EIGEN_CUTOFF)
            .map(|(col, _)| {
                let mut b = CMat::zeros(self.dim_out, self.dim_in);
                for (j, a) in self.terms.iter().enumerate() {
                    b += a * vecs[(j, col)];
                }
                b
            })
            .collect();
        Self::from_kraus_with_dims(terms, self.dim_in, self.dim_out)
            .expect("compact preserves shapes")
    }

    /// `‖choi(self) - choi(other)‖_F <= tol`.
    pub fn equivalent(&self, other: &GeneralizedOperator, tol: f64) -> bool {
        if self.dim_in != other.dim_in || self.dim_out != other.dim_out {
            return false;
        }
        linalg::frobenius_norm(&(self.choi() - other.choi())) <= tol
    }

    /// Channel induced on the first `keep_qubits` output qubits when the
    /// remaining output qubits are moved into the environment.
    pub fn trace_out_tail(&self, total_qubits: usize, keep_qubits: usize) -> Result<Self> {
        if self.dim_out != 1 << total_qubits || keep_qubits > total_qubits {
            return Err(Error::InvalidArgument(format!(
                "cannot keep {keep_qubits} of {total_qubits} qubits from output dimension {}",
                self.dim_out
            )));
        }
        let keep_dim = 1 << keep_qubits;
        let tail_dim = 1 << (total_qubits - keep_qubits);
        let mut terms = Vec::with_capacity(self.terms.len() * tail_dim);
        for a in &self.terms {
            for t in 0..tail_dim {
                terms.push(CMat::from_fn(keep_dim, self.dim_in, |r, col| {
                    a[(r * tail_dim + t, col)]
                }));
            }
        }
        Self::from_kraus_with_dims(terms, self.dim_in, keep_dim)
    }

    /// Debug text form: a header line, then per term a `term k` line followed
    /// by one line per row of space-separated `re,im` pairs.
    pub fn to_debug_text(&self) -> String {
        let mut s = format!(
            "generalized_operator dim_in={} dim_out={} terms={}\n",
            self.dim_in,
            self.dim_out,
            self.terms.len()
        );
        for (k, a) in self.terms.iter().enumerate() {
            let _ = writeln!(s, "term {k}");
            for r in 0..a.nrows() {
                let row: Vec<String> = (0..a.ncols())
                    .map(|col| format!("{},{}", a[(r, col)].re, a[(r, col)].im))
                    .collect();
                let _ = writeln!(s, "{}", row.join(" "));
            }
        }
        s
    }

    pub fn from_debug_text(text: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse(format!("generalized operator text: {msg}"));
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| bad("empty input"))?;
        let mut fields = header.split_whitespace();
        if fields.next() != Some("generalized_operator") {
            return Err(bad("missing header"));
        }
        let mut field = |name: &str| -> Result<usize> {
            let f = fields.next().ok_or_else(|| bad("truncated header"))?;
            f.strip_prefix(name)
                .and_then(|v| v.strip_prefix('='))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad(&format!("bad header field `{f}`")))
        };
        let dim_in = field("dim_in")?;
        let dim_out = field("dim_out")?;
        let count = field("terms")?;
        let mut terms = Vec::with_capacity(count);
        for k in 0..count {
            if lines.next().map(str::trim) != Some(&format!("term {k}")) {
                return Err(bad(&format!("expected `term {k}`")));
            }
            let mut m = CMat::zeros(dim_out, dim_in);
            for r in 0..dim_out {
                let line = lines.next().ok_or_else(|| bad("truncated matrix"))?;
                let entries: Vec<&str> = line.split_whitespace().collect();
                if entries.len() != dim_in {
                    return Err(bad("wrong row length"));
                }
                for (col, e) in entries.iter().enumerate() {
                    let (re, im) = e.split_once(',').ok_or_else(|| bad("entry is not re,im"))?;
                    let re: f64 = re.parse().map_err(|_| bad("bad real part"))?;
                    let im: f64 = im.parse().map_err(|_| bad("bad imaginary part"))?;
                    m[(r, col)] = c(re, im);
                }
            }
            terms.push(m);
        }
        Self::from_kraus_with_dims(terms, dim_in, dim_out)
    }
}

/// An isometric embedding of a subspace, stored as orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SubspaceIsometry {
    columns: CMat,
}

impl SubspaceIsometry {
    pub const TOL: f64 = 1e-12;

    pub fn new(columns: CMat) -> Result<Self> {
        if columns.ncols() == 0 || columns.ncols() > columns.nrows() {
            return Err(Error::InvalidArgument(format!(
                "isometry must have 1..={} columns, got {}",
                columns.nrows(),
                columns.ncols()
            )));
        }
        let deviation = linalg::isometry_defect(&columns);
        if deviation > Self::TOL {
            return Err(Error::NotIsometry { deviation });
        }
        Ok(Self { columns })
    }

    /// The subspace spanned by the given vectors, orthonormalized.
    pub fn span(vectors: &[CVec]) -> Result<Self> {
        let first = vectors
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty span".into()))?;
        let m = CMat::from_fn(first.len(), vectors.len(), |r, col| vectors[col][r]);
        Self::new(linalg::polar_isometry(&m))
    }

    pub fn full(dim: usize) -> Self {
        Self {
            columns: linalg::identity(dim),
        }
    }

    pub fn columns(&self) -> &CMat {
        &self.columns
    }

    pub fn ambient_dim(&self) -> usize {
        self.columns.nrows()
    }

    pub fn sub_dim(&self) -> usize {
        self.columns.ncols()
    }

    pub fn projector(&self) -> CMat {
        &self.columns * self.columns.adjoint()
    }
}

/// Single-qubit Pauli matrices as dynamic matrices, in the order I, X, Y, Z.
pub fn pauli_basis() -> [CMat; 4] {
    [
        linalg::identity(2),
        linalg::to_dyn(&linalg::pauli_x()),
        linalg::to_dyn(&linalg::pauli_y()),
        linalg::to_dyn(&linalg::pauli_z()),
    ]
}

/// `|psi><psi|`.
pub fn pure_density(psi: &CVec) -> CMat {
    psi * psi.adjoint()
}

/// `<psi| rho |psi>` for normalized `psi`.
pub fn fidelity_with_pure(rho: &CMat, psi: &CVec) -> f64 {
    (psi.adjoint() * rho * psi)[(0, 0)].re
}
