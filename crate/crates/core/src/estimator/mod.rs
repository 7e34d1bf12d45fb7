//! Gain recovery from a vectorized covariance `r̂ ≈ D·g`.
//!
//! Two solvers share one realified formulation. Because `DᴴD` is real and
//! `g` is real, `min ‖r̂ − Dθ‖` over real `θ` is the ordinary least-squares
//! problem with `A = [Re D; Im D]` (2Q²×K) and `b = [Re r̂; Im r̂]`.
//!
//! - [`estimate_zf`]: the unconstrained minimizer (`D†r̂`), defined only
//!   when `D` has full column rank.
//! - [`estimate_nnls`]: the minimizer over `θ ≥ 0` by Lawson–Hanson; works
//!   for any `K`, including `K > Q²`.

pub mod nnls;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::model::{vectorize_covariance, DesignMatrix};
use crate::{CMatrix, CVector, Error, Result};

pub use nnls::{kkt_violation, lawson_hanson, NnlsSolution};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "ZF")]
    Zf,
    #[serde(rename = "NNLS")]
    Nnls,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainEstimate {
    pub g_hat: Vec<f64>,
    /// `‖r̂ − D·ĝ‖`.
    pub residual_norm: f64,
    pub iterations: usize,
    /// Number of coordinates held at the bound `ĝ_k = 0` (NNLS only).
    pub active_set_size: usize,
    pub method: Method,
    /// NNLS: largest KKT violation. ZF: largest stationarity residual.
    pub kkt_max_violation: f64,
    /// False when the NNLS solver hit its iteration cap.
    pub converged: bool,
}

/// Serialized solver diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub method: Method,
    pub iterations: usize,
    pub residual_norm: f64,
    pub kkt_max_violation: f64,
}

impl GainEstimate {
    pub fn diagnostics(&self) -> SolverDiagnostics {
        SolverDiagnostics {
            method: self.method,
            iterations: self.iterations,
            residual_norm: self.residual_norm,
            kkt_max_violation: self.kkt_max_violation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NnlsConfig {
    pub kkt_tol: f64,
    /// Cap on least-squares subproblems; `None` means `10·K`.
    pub max_iters: Option<usize>,
}

impl Default for NnlsConfig {
    fn default() -> Self {
        Self {
            kkt_tol: 1e-10,
            max_iters: None,
        }
    }
}

/// `[Re D; Im D]`.
pub fn realify_matrix(d: &CMatrix) -> DMatrix<f64> {
    let (rows, cols) = d.shape();
    DMatrix::from_fn(2 * rows, cols, |i, j| {
        if i < rows {
            d[(i, j)].re
        } else {
            d[(i - rows, j)].im
        }
    })
}

/// `[Re v; Im v]`.
pub fn realify_vector(v: &CVector) -> DVector<f64> {
    let n = v.len();
    DVector::from_fn(2 * n, |i, _| if i < n { v[i].re } else { v[i - n].im })
}

fn check_len(d: &DesignMatrix, r_hat: &CVector) -> Result<()> {
    let expect = d.q() * d.q();
    if r_hat.len() != expect {
        return Err(Error::Dimension(format!(
            "r̂ has length {}, expected Q² = {expect}",
            r_hat.len()
        )));
    }
    if r_hat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Domain("r̂ has non-finite entries".into()));
    }
    Ok(())
}

fn residual(d: &DesignMatrix, r_hat: &CVector, g: &[f64]) -> f64 {
    (r_hat - d.apply(g)).norm()
}

/// Zero-forcing estimate `ĝ = (DᴴD)⁻¹Dᴴr̂`, non-negativity ignored.
///
/// The imaginary part of `(DᴴD)⁻¹Dᴴr̂` vanishes for Hermitian covariances; it
/// is checked to be below `1e-6·‖ĝ‖` and then dropped.
pub fn estimate_zf(d: &DesignMatrix, r_hat: &CVector) -> Result<GainEstimate> {
    check_len(d, r_hat)?;
    let k = d.k();
    if d.rank() < k {
        return Err(Error::RankDeficient {
            rank: d.rank(),
            required: k,
        });
    }
    let a = realify_matrix(d.matrix());
    let b = realify_vector(r_hat);
    let svd = a.clone().svd(true, true);
    let g = svd
        .solve(&b, 0.0)
        .map_err(|e| Error::Numerical(e.to_string()))?;

    let dh_r = d.matrix().adjoint() * r_hat;
    let imag_rhs = DVector::from_iterator(k, dh_r.iter().map(|z| z.im));
    let chol = d.gram().clone().cholesky().ok_or(Error::RankDeficient {
        rank: d.rank(),
        required: k,
    })?;
    let imag = chol.solve(&imag_rhs).norm();
    let g_norm = g.norm();
    if imag > 1e-6 * g_norm + 1e-12 * r_hat.norm() {
        return Err(Error::Numerical(format!(
            "zero-forcing solution has imaginary residue {imag:.3e} (‖ĝ‖ = {g_norm:.3e})"
        )));
    }

    let stationarity = nnls::dual(&a, &b, &g).amax();
    let g_hat: Vec<f64> = g.iter().copied().collect();
    Ok(GainEstimate {
        residual_norm: residual(d, r_hat, &g_hat),
        g_hat,
        iterations: 1,
        active_set_size: 0,
        method: Method::Zf,
        kkt_max_violation: stationarity,
        converged: true,
    })
}

/// Non-negative least squares `argmin_{θ ≥ 0} ‖r̂ − Dθ‖²`.
pub fn estimate_nnls(d: &DesignMatrix, r_hat: &CVector, cfg: &NnlsConfig) -> Result<GainEstimate> {
    check_len(d, r_hat)?;
    if !(cfg.kkt_tol.is_finite() && cfg.kkt_tol >= 0.0) {
        return Err(Error::Domain(format!("kkt_tol {} must be ≥ 0", cfg.kkt_tol)));
    }
    let k = d.k();
    let max_iters = cfg.max_iters.unwrap_or(10 * k);
    let a = realify_matrix(d.matrix());
    let b = realify_vector(r_hat);
    let sol = lawson_hanson(&a, &b, cfg.kkt_tol, max_iters);
    let g_hat: Vec<f64> = sol.x.iter().copied().collect();
    Ok(GainEstimate {
        residual_norm: residual(d, r_hat, &g_hat),
        active_set_size: g_hat.iter().filter(|&&v| v == 0.0).count(),
        g_hat,
        iterations: sol.iterations,
        method: Method::Nnls,
        kkt_max_violation: sol.kkt_max_violation,
        converged: sol.converged,
    })
}

pub fn estimate(d: &DesignMatrix, r_hat: &CVector, method: Method, cfg: &NnlsConfig) -> Result<GainEstimate> {
    match method {
        Method::Zf => estimate_zf(d, r_hat),
        Method::Nnls => estimate_nnls(d, r_hat, cfg),
    }
}

/// `r̂ = vec(R) − vec(σ_w²·I)` for any covariance estimate.
pub fn r_hat_from_covariance(cov: &CMatrix, sigma_w2: f64) -> Result<CVector> {
    Ok(vectorize_covariance(cov, sigma_w2)?.r)
}

/// `r̂` from the sample covariance of a simulated block.
pub fn build_r_hat(realization: &ChannelRealization, sigma_w2: f64) -> Result<CVector> {
    r_hat_from_covariance(&realization.sample_cov, sigma_w2)
}
