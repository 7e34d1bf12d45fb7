//! Pilot codebooks, the design matrix `D`, covariance vectorization and
//! numerical rank.
//!
//! Vectorization is column-major: `vec(R)` stacks the columns of `R`, so the
//! entry `R[(i, j)]` lands at index `i + j·Q`. This matches the storage order
//! of [`nalgebra::DMatrix`] and is the binary contract for every `Q²`-vector
//! in the crate.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, SVD};
use serde::{Deserialize, Serialize};

use crate::{CMatrix, CVector, Error, Result, C64};

/// Column norms of a valid codebook must be within this of 1.
pub const UNIT_NORM_TOL: f64 = 1e-12;
/// Default relative singular-value cutoff for [`numerical_rank`].
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
/// Default cap on the number of entries of `D` (`Q²·K`).
pub const DEFAULT_ELEMENT_BUDGET: usize = 100_000_000;
/// Relative asymmetry accepted by [`vectorize_covariance`].
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Tolerance of the `DᴴD == |PᴴP|^∘2` cross-check.
pub const GRAM_CHECK_TOL: f64 = 1e-12;

const SVD_MAX_ITERS: usize = 10_000;

/// How a codebook was produced. Some kinds carry structural invariants that
/// [`PilotCodebook::new`] enforces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CodebookKind {
    GaussianComplex,
    /// Real entries; imaginary parts are exactly zero.
    GaussianReal,
    /// Every entry has modulus `1/√Q`.
    RandomPhase,
    Vandermonde,
    Grassmannian,
    External,
}

impl CodebookKind {
    pub const ALL: [CodebookKind; 6] = [
        CodebookKind::GaussianComplex,
        CodebookKind::GaussianReal,
        CodebookKind::RandomPhase,
        CodebookKind::Vandermonde,
        CodebookKind::Grassmannian,
        CodebookKind::External,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CodebookKind::GaussianComplex => "GaussianComplex",
            CodebookKind::GaussianReal => "GaussianReal",
            CodebookKind::RandomPhase => "RandomPhase",
            CodebookKind::Vandermonde => "Vandermonde",
            CodebookKind::Grassmannian => "Grassmannian",
            CodebookKind::External => "External",
        }
    }
}

impl fmt::Display for CodebookKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CodebookKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CodebookKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidCodebook(format!("unknown codebook kind {s:?}")))
    }
}

/// A `Q×K` pilot matrix: column `k` is user `k`'s pilot sequence over the `Q`
/// pilot resource elements. Columns have unit Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotCodebook {
    entries: CMatrix,
    kind: CodebookKind,
    column_norms: Vec<f64>,
}

impl PilotCodebook {
    /// Validates `entries` against the unit-norm and kind-specific invariants.
    pub fn new(entries: CMatrix, kind: CodebookKind) -> Result<Self> {
        let (q, k) = entries.shape();
        if q == 0 || k == 0 {
            return Err(Error::Dimension(format!("codebook must be non-empty, got {q}×{k}")));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidCodebook("non-finite entry".into()));
        }
        let column_norms: Vec<f64> = entries.column_iter().map(|c| c.norm()).collect();
        if let Some((j, n)) = column_norms
            .iter()
            .enumerate()
            .find(|(_, n)| (**n - 1.0).abs() > UNIT_NORM_TOL)
        {
            return Err(Error::InvalidCodebook(format!(
                "column {j} has norm {n:.17}, expected 1"
            )));
        }
        match kind {
            CodebookKind::GaussianReal => {
                if entries.iter().any(|z| z.im != 0.0) {
                    return Err(Error::InvalidCodebook(
                        "GaussianReal codebook has a non-zero imaginary part".into(),
                    ));
                }
            }
            CodebookKind::RandomPhase => {
                let target = 1.0 / (q as f64).sqrt();
                if entries.iter().any(|z| (z.norm() - target).abs() > UNIT_NORM_TOL) {
                    return Err(Error::InvalidCodebook(format!(
                        "RandomPhase codebook entry modulus differs from 1/√{q}"
                    )));
                }
            }
            _ => {}
        }
        Ok(Self {
            entries,
            kind,
            column_norms,
        })
    }

    /// Scales every column to unit norm, then validates.
    pub fn normalized(mut entries: CMatrix, kind: CodebookKind) -> Result<Self> {
        for (j, mut col) in entries.column_iter_mut().enumerate() {
            let n = col.norm();
            if !(n.is_finite() && n > 0.0) {
                return Err(Error::InvalidCodebook(format!("column {j} cannot be normalized")));
            }
            col.unscale_mut(n);
        }
        Self::new(entries, kind)
    }

    /// Number of pilot resource elements.
    pub fn q(&self) -> usize {
        self.entries.nrows()
    }

    /// Number of users.
    pub fn k(&self) -> usize {
        self.entries.ncols()
    }

    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn kind(&self) -> CodebookKind {
        self.kind
    }

    pub fn column_norms(&self) -> &[f64] {
        &self.column_norms
    }

    /// Relabels the codebook, re-checking the invariants of the new kind.
    pub fn with_kind(self, kind: CodebookKind) -> Result<Self> {
        Self::new(self.entries, kind)
    }

    /// `PᴴP`.
    pub fn inner_products(&self) -> CMatrix {
        self.entries.adjoint() * &self.entries
    }
}

/// The `Q²×K` matrix `D` whose column `k` is `p_k* ⊗ p_k = vec(p_k p_kᴴ)`,
/// together with its real Gram matrix and singular values.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    d: CMatrix,
    gram: DMatrix<f64>,
    singular_values: Vec<f64>,
    rank: usize,
    source: Arc<PilotCodebook>,
}

impl DesignMatrix {
    pub fn matrix(&self) -> &CMatrix {
        &self.d
    }

    /// `DᴴD`, real symmetric with unit diagonal.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn source(&self) -> &PilotCodebook {
        &self.source
    }

    /// Singular values of `D`, descending.
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Numerical rank at [`DEFAULT_RANK_TOL`].
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn q(&self) -> usize {
        self.source.q()
    }

    pub fn k(&self) -> usize {
        self.source.k()
    }

    pub fn is_full_column_rank(&self) -> bool {
        self.rank == self.k()
    }

    /// `D·θ` for a real gain vector.
    pub fn apply(&self, theta: &[f64]) -> CVector {
        assert_eq!(theta.len(), self.k(), "gain vector length");
        let mut out = CVector::zeros(self.d.nrows());
        for (col, &t) in self.d.column_iter().zip(theta) {
            if t != 0.0 {
                out.axpy(C64::new(t, 0.0), &col, C64::new(1.0, 0.0));
            }
        }
        out
    }
}

/// `p* ⊗ p` for a single pilot column.
pub fn conj_kron(p: &[C64]) -> Vec<C64> {
    p.iter()
        .flat_map(|a| p.iter().map(move |b| a.conj() * b))
        .collect()
}

/// Builds `D` with the default element budget.
pub fn build_design_matrix(p: &PilotCodebook) -> Result<DesignMatrix> {
    build_design_matrix_with_budget(p, DEFAULT_ELEMENT_BUDGET)
}

pub fn build_design_matrix_with_budget(p: &PilotCodebook, budget: usize) -> Result<DesignMatrix> {
    let (q, k) = (p.q(), p.k());
    let requested = q
        .checked_mul(q)
        .and_then(|qq| qq.checked_mul(k))
        .unwrap_or(usize::MAX);
    if requested > budget {
        return Err(Error::BudgetExceeded { requested, budget });
    }

    let mut d = CMatrix::zeros(q * q, k);
    for (j, col) in p.entries().column_iter().enumerate() {
        let kron = conj_kron(col.as_slice());
        d.column_mut(j).copy_from_slice(&kron);
    }

    let gram_c = d.adjoint() * &d;
    let imag = gram_c.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag >= GRAM_CHECK_TOL {
        return Err(Error::Numerical(format!(
            "Gram matrix has imaginary residue {imag:.3e}"
        )));
    }
    let mut gram = DMatrix::from_fn(k, k, |i, j| gram_c[(i, j)].re);
    gram = (&gram + gram.transpose()) * 0.5;

    let pp = p.inner_products();
    let dev = gram
        .iter()
        .zip(pp.iter())
        .map(|(g, z)| (g - z.norm_sqr()).abs())
        .fold(0.0, f64::max);
    if dev >= GRAM_CHECK_TOL {
        return Err(Error::Numerical(format!(
            "DᴴD deviates from |PᴴP|^2 by {dev:.3e}"
        )));
    }

    let singular_values = singular_values(&d)?;
    let rank = rank_from_singular_values(&singular_values, DEFAULT_RANK_TOL);
    Ok(DesignMatrix {
        d,
        gram,
        singular_values,
        rank,
        source: Arc::new(p.clone()),
    })
}

/// Singular values, sorted descending.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.is_empty() {
        return Err(Error::Dimension("empty matrix has no singular values".into()));
    }
    let svd = SVD::try_new(m.clone(), false, false, f64::EPSILON, SVD_MAX_ITERS)
        .ok_or(Error::SvdNonConvergence)?;
    let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    Ok(s)
}

fn rank_from_singular_values(s: &[f64], rel_tol: f64) -> usize {
    let largest = s.first().copied().unwrap_or(0.0);
    if largest <= 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rel_tol * largest).count()
}

/// Number of singular values above `rel_tol` times the largest one.
pub fn numerical_rank(m: &CMatrix, rel_tol: f64) -> Result<usize> {
    Ok(rank_from_singular_values(&singular_values(m)?, rel_tol))
}

/// The vectorized covariance system `r = r_y − r_w`.
#[derive(Debug, Clone, PartialEq)]
pub struct VecSystem {
    /// `vec(R)`.
    pub r_y: CVector,
    /// `vec(σ_w²·I)`.
    pub r_w: CVector,
    pub r: CVector,
}

/// Column-major vectorization of a Hermitian `Q×Q` covariance, minus the
/// vectorized noise floor `σ_w²·I`.
pub fn vectorize_covariance(cov: &CMatrix, sigma_w2: f64) -> Result<VecSystem> {
    let (rows, cols) = cov.shape();
    if rows != cols || rows == 0 {
        return Err(Error::Dimension(format!(
            "covariance must be square and non-empty, got {rows}×{cols}"
        )));
    }
    if !(sigma_w2.is_finite() && sigma_w2 >= 0.0) {
        return Err(Error::Domain(format!("noise variance {sigma_w2} must be finite and ≥ 0")));
    }
    let scale = cov.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if !scale.is_finite() {
        return Err(Error::Domain("covariance has non-finite entries".into()));
    }
    let asym = (cov - cov.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    let asymmetry = if scale > 0.0 { asym / scale } else { 0.0 };
    if asymmetry > HERMITIAN_TOL {
        return Err(Error::NotHermitian { asymmetry });
    }

    let q = rows;
    let r_y = CVector::from_column_slice(cov.as_slice());
    let mut r_w = CVector::zeros(q * q);
    for i in 0..q {
        r_w[i * (q + 1)] = C64::new(sigma_w2, 0.0);
    }
    let r = &r_y - &r_w;
    Ok(VecSystem { r_y, r_w, r })
}

/// Inverse of column-major vectorization.
pub fn devectorize(v: &CVector) -> Result<CMatrix> {
    let n = v.len();
    let q = (n as f64).sqrt().round() as usize;
    if q == 0 || q * q != n {
        return Err(Error::Dimension(format!("length {n} is not a non-zero perfect square")));
    }
    Ok(CMatrix::from_column_slice(q, q, v.as_slice()))
}
