//! Reference implementations used as independent oracles.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use pilotgain::{CMatrix, C64};

/// `|p_iᴴ p_j|²` by explicit double loop over entries.
pub fn gram_by_loops(p: &CMatrix) -> DMatrix<f64> {
    let (q, k) = p.shape();
    DMatrix::from_fn(k, k, |i, j| {
        let mut s = C64::new(0.0, 0.0);
        for r in 0..q {
            s += p[(r, i)].conj() * p[(r, j)];
        }
        s.norm_sqr()
    })
}

/// FISTA with adaptive restart on `½‖Ax − b‖²` over `x ≥ 0`.
pub fn projected_gradient(a: &DMatrix<f64>, b: &DVector<f64>, iters: usize) -> DVector<f64> {
    let n = a.ncols();
    let ata = a.tr_mul(a);
    let atb = a.tr_mul(b);
    let lipschitz = ata.clone().symmetric_eigen().eigenvalues.max().max(1e-300);
    let step = 1.0 / lipschitz;
    let mut x = DVector::zeros(n);
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let grad = &ata * &y - &atb;
        let x_next = (&y - grad * step).map(|v| v.max(0.0));
        // Restart momentum when it points uphill.
        let uphill = (&y - &x_next).dot(&(&x_next - &x)) > 0.0;
        let t_next = if uphill { 1.0 } else { (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0 };
        y = if uphill {
            x_next.clone()
        } else {
            &x_next + (&x_next - &x) * ((t - 1.0) / t_next)
        };
        x = x_next;
        t = t_next;
    }
    x
}

pub fn objective(a: &DMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>) -> f64 {
    (a * x - b).norm_squared()
}

/// Exact NNLS by enumerating supports: for every subset S, solve the
/// unconstrained least-squares problem on S and keep the best feasible one.
pub fn nnls_by_enumeration(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    assert!(n <= 16, "enumeration is exponential");
    let mut best = DVector::zeros(n);
    let mut best_obj = objective(a, b, &best);
    for mask in 1u32..(1 << n) {
        let cols: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
        let sub = a.select_columns(&cols);
        let svd = sub.svd(true, true);
        let Ok(s) = svd.solve(b, 1e-12 * svd.singular_values.max()) else { continue };
        if s.iter().any(|&v| v < 0.0) {
            continue;
        }
        let mut x = DVector::zeros(n);
        for (i, &j) in cols.iter().enumerate() {
            x[j] = s[i];
        }
        let obj = objective(a, b, &x);
        if obj < best_obj - 1e-15 {
            best_obj = obj;
            best = x;
        }
    }
    best
}
