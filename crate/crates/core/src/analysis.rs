//! Noise-enhancement analysis.
//!
//! Under the zero-forcing estimator the error covariance is modelled as
//! `R_z = σ_e²·(DᴴD)⁻¹`, so the spectrum of `(DᴴD)⁻¹` measures how much a
//! pilot design amplifies covariance-estimation error. Averages are taken
//! over the `K` dimensions and reported in dB.
//!
//! For an equiangular codebook meeting the Welch bound, `DᴴD` has unit
//! diagonal and constant off-diagonal `c_d = (K−Q)/(Q(K−1))`, which yields
//! the closed forms in [`etf_gram_spectrum`] and
//! [`theoretical_avg_enhancement_db`].

use std::f64::consts::LOG10_E;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::model::DesignMatrix;
use crate::{Error, Result};

/// Eigen-summary of `(DᴴD)⁻¹` for one design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseEnhancementReport {
    /// Eigenvalues `λ_k` of `DᴴD`, descending.
    pub eigenvalues_gram: Vec<f64>,
    /// `1/λ_k`, in the same order. `None` when `D` is rank deficient.
    pub eigenvalues_inv: Option<Vec<f64>>,
    /// `10·log₁₀(1/λ_k)`.
    pub per_dimension_db: Option<Vec<f64>>,
    /// `10·log₁₀(Σ_k (1/λ_k) / K)`.
    pub average_db: Option<f64>,
    /// `D` has full column rank.
    pub condition_flag: bool,
}

impl NoiseEnhancementReport {
    /// One row per dimension: `index,lambda,lambda_inv,db`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,lambda,lambda_inv,db\n");
        for (i, l) in self.eigenvalues_gram.iter().enumerate() {
            let inv = self.eigenvalues_inv.as_ref().map(|v| v[i]);
            let db = self.per_dimension_db.as_ref().map(|v| v[i]);
            let _ = writeln!(out, "{i},{l},{},{}", opt(inv), opt(db));
        }
        out
    }
}

pub(crate) fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Sorted-descending eigenvalues of a real symmetric matrix.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let eig = m
        .clone()
        .try_symmetric_eigen(f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;
    let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    Ok(v)
}

pub fn noise_enhancement(d: &DesignMatrix) -> Result<NoiseEnhancementReport> {
    let eigenvalues_gram = symmetric_eigenvalues(d.gram())?;
    let k = d.k();
    let smallest = eigenvalues_gram.last().copied().unwrap_or(0.0);
    let condition_flag = d.is_full_column_rank() && smallest > 0.0;
    if !condition_flag {
        return Ok(NoiseEnhancementReport {
            eigenvalues_gram,
            eigenvalues_inv: None,
            per_dimension_db: None,
            average_db: None,
            condition_flag,
        });
    }
    let inv: Vec<f64> = eigenvalues_gram.iter().map(|l| 1.0 / l).collect();
    let per_dimension_db = inv.iter().map(|v| 10.0 * v.log10()).collect();
    let average_db = 10.0 * (inv.iter().sum::<f64>() / k as f64).log10();
    Ok(NoiseEnhancementReport {
        eigenvalues_gram,
        eigenvalues_inv: Some(inv),
        per_dimension_db: Some(per_dimension_db),
        average_db: Some(average_db),
        condition_flag,
    })
}

/// Two-level spectrum of the Gram of an equiangular frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtfSpectrum {
    /// Squared Welch coherence `(K−Q)/(Q(K−1))`.
    pub c_d: f64,
    /// `1 + (K−1)c_d` once, then `1 − c_d` repeated `K−1` times.
    pub eigenvalues: Vec<f64>,
}

fn check_frame_domain(q: usize, k: usize) -> Result<()> {
    if q < 2 || k <= q || k > q * q {
        return Err(Error::Domain(format!(
            "equiangular closed forms need 2 ≤ Q < K ≤ Q², got Q={q}, K={k}"
        )));
    }
    Ok(())
}

pub fn etf_gram_spectrum(q: usize, k: usize) -> Result<EtfSpectrum> {
    check_frame_domain(q, k)?;
    let c_d = (k - q) as f64 / (q * (k - 1)) as f64;
    let mut eigenvalues = vec![1.0 - c_d; k];
    eigenvalues[0] = 1.0 + (k - 1) as f64 * c_d;
    Ok(EtfSpectrum { c_d, eigenvalues })
}

/// Average noise enhancement per dimension of an equiangular codebook:
/// `10·log₁₀(Q/K² + Q(K−1)²/((Q−1)K²))`.
pub fn theoretical_avg_enhancement_db(q: usize, k: usize) -> Result<f64> {
    check_frame_domain(q, k)?;
    let (q, k) = (q as f64, k as f64);
    Ok(10.0 * (q / (k * k) + q * (k - 1.0).powi(2) / ((q - 1.0) * k * k)).log10())
}

/// Fully loaded (`K = Q²`) special case, `10·log₁₀(1 + (Q−1)/Q²)`.
pub fn full_load_avg_enhancement_db(q: usize) -> Result<f64> {
    check_frame_domain(q, q * q)?;
    let q = q as f64;
    Ok(10.0 * (1.0 + (q - 1.0) / (q * q)).log10())
}

/// Large-`Q` approximation `10·log₁₀(e)/Q` of the fully loaded average.
pub fn large_q_asymptote_db(q: usize) -> f64 {
    10.0 * LOG10_E / q as f64
}

/// `R_z = σ_e²·(DᴴD)⁻¹`.
pub fn closed_form_rz(d: &DesignMatrix, sigma_e2: f64) -> Result<DMatrix<f64>> {
    if !(sigma_e2.is_finite() && sigma_e2 >= 0.0) {
        return Err(Error::Domain(format!("σ_e² = {sigma_e2} must be ≥ 0")));
    }
    let k = d.k();
    let rank_err = || Error::RankDeficient {
        rank: d.rank(),
        required: k,
    };
    if !d.is_full_column_rank() {
        return Err(rank_err());
    }
    let inv = d.gram().clone().cholesky().ok_or_else(rank_err)?.inverse();
    let rz = inv * sigma_e2;
    Ok((&rz + rz.transpose()) * 0.5)
}

/// `‖ĝ − g‖² / ‖g‖²`.
pub fn nmse(g_true: &[f64], g_hat: &[f64]) -> Result<f64> {
    if g_true.len() != g_hat.len() {
        return Err(Error::Dimension(format!(
            "length mismatch: {} vs {}",
            g_true.len(),
            g_hat.len()
        )));
    }
    let den: f64 = g_true.iter().map(|g| g * g).sum();
    if den == 0.0 {
        return Err(Error::Domain("NMSE undefined for an all-zero truth".into()));
    }
    let num: f64 = g_true.iter().zip(g_hat).map(|(g, h)| (h - g).powi(2)).sum();
    Ok(num / den)
}

/// Sample covariance (divisor `n − 1`) of equally long samples.
pub fn empirical_covariance(samples: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::Domain("need at least two samples".into()));
    }
    let k = samples[0].len();
    if samples.iter().any(|s| s.len() != k) {
        return Err(Error::Dimension("samples have different lengths".into()));
    }
    let mean: Vec<f64> = (0..k)
        .map(|j| samples.iter().map(|s| s[j]).sum::<f64>() / n as f64)
        .collect();
    Ok(DMatrix::from_fn(k, k, |i, j| {
        samples
            .iter()
            .map(|s| (s[i] - mean[i]) * (s[j] - mean[j]))
            .sum::<f64>()
            / (n - 1) as f64
    }))
}

/// Median of a non-empty slice (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> Option<f64> {
    quantile(values, 0.5)
}

/// Linear-interpolated quantile (type 7).
pub fn quantile(values: &[f64], p: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = (v.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    Some(v[lo] + (h - lo as f64) * (v[hi] - v[lo]))
}
