//! Lawson–Hanson active-set NNLS over the reals.

use nalgebra::{DMatrix, DVector};

/// Result of [`lawson_hanson`].
#[derive(Debug, Clone)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    /// Number of least-squares subproblems solved.
    pub iterations: usize,
    pub converged: bool,
    /// Largest KKT violation of the returned point.
    pub kkt_max_violation: f64,
}

/// `Aᵀ(b − Ax)`, the negative gradient of `½‖b − Ax‖²`.
pub fn dual(a: &DMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>) -> DVector<f64> {
    a.tr_mul(&(b - a * x))
}

/// Largest violation of the NNLS optimality conditions at a feasible `x`:
/// `|w_j|` where `x_j > 0`, `max(w_j, 0)` where `x_j = 0`.
pub fn kkt_violation(a: &DMatrix<f64>, b: &DVector<f64>, x: &DVector<f64>) -> f64 {
    let w = dual(a, b, x);
    x.iter()
        .zip(w.iter())
        .map(|(&xj, &wj)| if xj > 0.0 { wj.abs() } else { wj.max(0.0) })
        .fold(0.0, f64::max)
}

fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[usize]) -> DVector<f64> {
    let sub = a.select_columns(passive);
    let svd = sub.svd(true, true);
    let cutoff = svd.singular_values.max() * f64::EPSILON * (a.nrows().max(passive.len()) as f64);
    svd.solve(b, cutoff).expect("U and V were computed")
}

/// Minimizes `‖Ax − b‖²` subject to `x ≥ 0`.
///
/// `tol` bounds the dual variable on the zero set at termination; `max_iters`
/// caps the number of least-squares subproblems. On hitting the cap the
/// current (feasible) iterate is returned with `converged = false`.
pub fn lawson_hanson(a: &DMatrix<f64>, b: &DVector<f64>, tol: f64, max_iters: usize) -> NnlsSolution {
    let n = a.ncols();
    assert_eq!(a.nrows(), b.len(), "row count mismatch");
    let mut x = DVector::<f64>::zeros(n);
    let mut in_passive = vec![false; n];
    let mut iterations = 0;
    let mut converged = true;

    'outer: loop {
        let w = dual(a, b, &x);
        // Candidates that entered and immediately came back non-positive are
        // skipped for this outer step.
        let mut blocked = vec![false; n];
        let entering = loop {
            let t = (0..n)
                .filter(|&j| !in_passive[j] && !blocked[j] && w[j] > tol)
                .max_by(|&i, &j| w[i].total_cmp(&w[j]).then(j.cmp(&i)));
            let Some(t) = t else { break 'outer };
            if iterations >= max_iters {
                converged = false;
                break 'outer;
            }
            in_passive[t] = true;
            let passive: Vec<usize> = (0..n).filter(|&j| in_passive[j]).collect();
            let s = solve_passive(a, b, &passive);
            iterations += 1;
            let pos = passive.iter().position(|&j| j == t).unwrap();
            if s[pos] > 0.0 {
                break (passive, s);
            }
            in_passive[t] = false;
            blocked[t] = true;
        };

        let (mut passive, mut s) = entering;
        loop {
            if s.iter().all(|&v| v > 0.0) {
                for (i, &j) in passive.iter().enumerate() {
                    x[j] = s[i];
                }
                break;
            }
            // Step toward s until the first passive coordinate hits zero.
            let mut alpha = f64::INFINITY;
            let mut hit = passive[0];
            for (i, &j) in passive.iter().enumerate() {
                if s[i] <= 0.0 {
                    let denom = x[j] - s[i];
                    let step = if denom > 0.0 { x[j] / denom } else { 0.0 };
                    if step < alpha {
                        alpha = step;
                        hit = j;
                    }
                }
            }
            let alpha = alpha.clamp(0.0, 1.0);
            for (i, &j) in passive.iter().enumerate() {
                x[j] += alpha * (s[i] - x[j]);
            }
            x[hit] = 0.0;
            for &j in &passive {
                if x[j] <= 0.0 {
                    in_passive[j] = false;
                }
            }
            for j in 0..n {
                if !in_passive[j] {
                    x[j] = 0.0;
                }
            }
            passive = (0..n).filter(|&j| in_passive[j]).collect();
            if passive.is_empty() {
                break;
            }
            if iterations >= max_iters {
                converged = false;
                break 'outer;
            }
            s = solve_passive(a, b, &passive);
            iterations += 1;
        }
    }

    let kkt_max_violation = kkt_violation(a, b, &x);
    NnlsSolution {
        x,
        iterations,
        converged,
        kkt_max_violation,
    }
}
