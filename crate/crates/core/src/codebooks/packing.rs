//! Grassmannian line packing by alternating projection.
//!
//! Each iteration works on the Gram matrix `G = PᴴP`:
//!
//! 1. off-diagonal magnitudes above the Welch bound `μ` are shrunk toward it,
//!    phases kept, by the factor `max(μ/|g_ij|, 0.9)`; the diagonal is reset
//!    to 1;
//! 2. the result is projected onto Gram matrices of rank `r = min(Q, K)`:
//!    the top `r` eigenvectors are kept and their eigenvalues are set to the
//!    tight-frame value `K/r`;
//! 3. `P` is read back from the eigenvectors and its columns renormalized.
//!
//! The best iterate (smallest coherence) is tracked. A run stalls once its
//! coherence improves by less than `tol` over a window of 100 iterations.
//! A stall within `1e-4` of the bound ends the run; a stall above it restarts
//! the descent from a random perturbation of the best iterate, at most 20
//! times, after which the next stall ends the run. Ending on a stall is what
//! `converged` reports; running out of `max_iters` first is not.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coherence::welch_bound;
use crate::model::{CodebookKind, PilotCodebook};
use crate::rng::{complex_normal, stream};
use crate::{CMatrix, Error, Result, C64};

const STALL_WINDOW: usize = 100;
const MIN_SHRINK: f64 = 0.9;
/// A stall this close to the Welch bound ends the restart.
const WELCH_SLACK: f64 = 1e-4;
/// Perturbations allowed per restart when it stalls above the bound.
const MAX_KICKS: usize = 20;
/// Noise amplitude of a perturbation, relative to a unit-norm column.
const KICK_SIZE: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PackingConfig {
    pub max_iters: usize,
    /// Minimum improvement of the best coherence per 100 iterations.
    pub tol: f64,
    pub seed: u64,
    pub restarts: usize,
}

impl Default for PackingConfig {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            tol: 1e-7,
            seed: 0,
            restarts: 8,
        }
    }
}

impl PackingConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            seed,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.restarts == 0 || !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Domain(format!(
                "packing config must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct PackingOutcome {
    pub codebook: PilotCodebook,
    pub max_coherence: f64,
    pub welch_bound: f64,
    /// The stall criterion was met within `max_iters`.
    pub converged: bool,
    /// Iterations run by the selected restart.
    pub iterations: usize,
    /// Index of the restart that produced `codebook`.
    pub restart: usize,
    /// Best-so-far coherence after each iteration of the selected restart,
    /// starting with the initial codebook.
    pub trace: Vec<f64>,
}

struct RestartResult {
    best: CMatrix,
    best_coherence: f64,
    converged: bool,
    iterations: usize,
    trace: Vec<f64>,
}

/// Packs `k` lines in `C^q` with the best of `cfg.restarts` seeded runs.
///
/// Restarts are independent streams of `cfg.seed` and may run in parallel;
/// ties are broken by the lowest restart index, so the result does not depend
/// on scheduling.
pub fn gen_grassmannian(q: usize, k: usize, cfg: &PackingConfig) -> Result<PackingOutcome> {
    if q == 0 || k == 0 {
        return Err(Error::Dimension(format!("q and k must be ≥ 1, got q={q}, k={k}")));
    }
    if k > q * q {
        return Err(Error::Domain(format!("packing needs k ≤ q² = {}, got k={k}", q * q)));
    }
    cfg.validate()?;

    let runs: Vec<RestartResult> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| run_restart(q, k, cfg, r as u64))
        .collect::<Result<_>>()?;

    let (restart, chosen) = runs
        .into_iter()
        .enumerate()
        .reduce(|best, cur| if cur.1.best_coherence < best.1.best_coherence { cur } else { best })
        .expect("at least one restart");

    let codebook = PilotCodebook::normalized(chosen.best, CodebookKind::Grassmannian)?;
    Ok(PackingOutcome {
        max_coherence: chosen.best_coherence,
        welch_bound: welch_bound(q, k),
        converged: chosen.converged,
        iterations: chosen.iterations,
        restart,
        trace: chosen.trace,
        codebook,
    })
}

fn max_off_diagonal(g: &CMatrix) -> f64 {
    let k = g.ncols();
    let mut m: f64 = 0.0;
    for j in 0..k {
        for i in 0..j {
            m = m.max(g[(i, j)].norm());
        }
    }
    m
}

fn normalize_columns(p: &mut CMatrix) -> bool {
    for mut col in p.column_iter_mut() {
        let n = col.norm();
        if !(n.is_finite() && n > 0.0) {
            return false;
        }
        col.unscale_mut(n);
    }
    true
}

fn run_restart(q: usize, k: usize, cfg: &PackingConfig, restart: u64) -> Result<RestartResult> {
    let mu = welch_bound(q, k);
    let rank = q.min(k);
    let eig_scale = (k as f64 / rank as f64).sqrt();

    let mut rng = stream(cfg.seed, restart);
    let mut p = CMatrix::from_fn(q, k, |_, _| complex_normal(&mut rng));
    if !normalize_columns(&mut p) {
        return Err(Error::Numerical("degenerate initial codebook".into()));
    }

    let mut best = p.clone();
    let mut best_coherence = f64::INFINITY;
    let mut trace = Vec::with_capacity(cfg.max_iters.min(1 << 16) + 1);
    let mut converged = false;
    let mut iterations = 0;
    // Best coherence since the last perturbation; the stall test runs on it.
    let mut run_trace: Vec<f64> = Vec::new();
    let mut kicks = 0;

    loop {
        let mut g = p.adjoint() * &p;
        let c = max_off_diagonal(&g);
        if c < best_coherence {
            best_coherence = c;
            best.copy_from(&p);
        }
        trace.push(best_coherence);
        run_trace.push(run_trace.last().map_or(c, |&b: &f64| b.min(c)));

        let n = run_trace.len();
        if n > STALL_WINDOW && (n - 1) % STALL_WINDOW == 0 {
            let stalled = run_trace[n - 1 - STALL_WINDOW] - run_trace[n - 1] < cfg.tol;
            if stalled && (best_coherence - mu <= WELCH_SLACK || kicks == MAX_KICKS) {
                converged = true;
                break;
            }
            if stalled && iterations < cfg.max_iters {
                // Stuck above the bound: jump to a nearby point of the best
                // iterate and keep descending.
                kicks += 1;
                let amp = KICK_SIZE / (q as f64).sqrt();
                p = CMatrix::from_fn(q, k, |i, j| best[(i, j)] + complex_normal(&mut rng) * amp);
                if !normalize_columns(&mut p) {
                    p.copy_from(&best);
                }
                run_trace.clear();
                iterations += 1;
                continue;
            }
        }
        if iterations == cfg.max_iters {
            break;
        }
        iterations += 1;

        for j in 0..k {
            for i in 0..k {
                if i == j {
                    g[(i, j)] = C64::new(1.0, 0.0);
                    continue;
                }
                let a = g[(i, j)].norm();
                if a > mu {
                    g[(i, j)] *= (mu / a).max(MIN_SHRINK);
                }
            }
        }

        let eig = g
            .try_symmetric_eigen(f64::EPSILON, 0)
            .ok_or_else(|| Error::Numerical("Hermitian eigensolver did not converge".into()))?;
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

        let mut next = CMatrix::zeros(q, k);
        for (row, &idx) in order.iter().take(rank).enumerate() {
            let v = eig.eigenvectors.column(idx);
            for col in 0..k {
                next[(row, col)] = v[col].conj() * eig_scale;
            }
        }
        if !normalize_columns(&mut next) {
            break;
        }
        p = next;
    }

    Ok(RestartResult {
        best,
        best_coherence,
        converged,
        iterations,
        trace,
    })
}
