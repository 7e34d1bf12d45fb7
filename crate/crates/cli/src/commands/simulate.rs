//! Monte-Carlo gain estimation over an antenna-count sweep.
//!
//! Trial `t` draws from the same random stream at every `M` (common random
//! numbers), so differences across the sweep reflect `M` rather than luck.

use std::fmt::Write as _;
use std::path::Path;

use pilotgain::analysis::{median, nmse, quantile};
use pilotgain::channel::{exact_covariance, parse_gains, pathloss_gains, sample_active_users, simulate_with_gains};
use pilotgain::estimator::{estimate, r_hat_from_covariance, GainEstimate, Method, NnlsConfig};
use pilotgain::model::{build_design_matrix, DesignMatrix};
use pilotgain::PilotCodebook;
use rayon::prelude::*;
use serde::Serialize;

use super::load_codebook;
use crate::error::{CliError, CliResult};
use crate::manifest::{Inputs, Manifest, Outputs};
use crate::spec::{ExperimentSpec, GainsSource, SimulateSpec};

/// Share of trials allowed to hit the solver's iteration cap.
const MAX_CAP_FRACTION: f64 = 0.1;

struct TrialRow {
    m: usize,
    trial: u64,
    nmse: f64,
    estimate: GainEstimate,
    support_ok: Option<bool>,
}

#[derive(Serialize)]
struct MSummary {
    m: usize,
    trials: usize,
    nmse_median: f64,
    nmse_q1: f64,
    nmse_q3: f64,
    residual_median: f64,
    support_recovery_rate: Option<f64>,
    iteration_cap_hits: usize,
}

#[derive(Serialize)]
struct Summary {
    method: Method,
    q: usize,
    k: usize,
    exact_covariance: bool,
    per_m: Vec<MSummary>,
    iteration_cap_hits: usize,
}

struct Trial<'a> {
    p: &'a PilotCodebook,
    d: &'a DesignMatrix,
    g: &'a [f64],
    s: &'a SimulateSpec,
    cfg: NnlsConfig,
}

impl Trial<'_> {
    fn run(&self, m: usize, t: u64) -> CliResult<TrialRow> {
        let s = self.s;
        let g_t = match s.active {
            Some(a) => sample_active_users(self.g, a, s.seed, t)?,
            None => self.g.to_vec(),
        };
        let cov = if s.exact_covariance {
            exact_covariance(self.p, &g_t, s.sigma_w2)?
        } else {
            simulate_with_gains(self.p, &g_t, m, s.sigma_w2, s.seed, t)?.sample_cov
        };
        let r = r_hat_from_covariance(&cov, s.assumed_sigma_w2.unwrap_or(s.sigma_w2))?;
        let est = estimate(self.d, &r, s.method.into(), &self.cfg)?;
        let err = nmse(&g_t, &est.g_hat)?;
        let support_ok = s.active.map(|_| {
            est.g_hat
                .iter()
                .zip(&g_t)
                .all(|(&x, &g)| (x > s.support_tol) == (g > 0.0))
        });
        Ok(TrialRow { m, trial: t, nmse: err, estimate: est, support_ok })
    }
}

fn load_gains(inputs: &mut Inputs, src: &GainsSource) -> CliResult<Vec<f64>> {
    match src {
        GainsSource::Gains { path } => {
            parse_gains(&inputs.read(path)?).map_err(|e| CliError::runtime(format!("{path}: {e}")))
        }
        GainsSource::Distances { path, alpha } => {
            let d = parse_gains(&inputs.read(path)?).map_err(|e| CliError::runtime(format!("{path}: {e}")))?;
            Ok(pathloss_gains(&d, *alpha)?)
        }
    }
}

fn trials_csv(rows: &[TrialRow]) -> String {
    let mut out = String::from(
        "m,trial,nmse,residual_norm,iterations,active_set_size,kkt_max_violation,converged,support_ok\n",
    );
    for r in rows {
        let e = &r.estimate;
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.m,
            r.trial,
            r.nmse,
            e.residual_norm,
            e.iterations,
            e.active_set_size,
            e.kkt_max_violation,
            e.converged,
            r.support_ok.map(|b| b.to_string()).unwrap_or_default()
        );
    }
    out
}

fn summarize(m: usize, rows: &[TrialRow]) -> MSummary {
    let nmses: Vec<f64> = rows.iter().map(|r| r.nmse).collect();
    let residuals: Vec<f64> = rows.iter().map(|r| r.estimate.residual_norm).collect();
    let support: Vec<bool> = rows.iter().filter_map(|r| r.support_ok).collect();
    MSummary {
        m,
        trials: rows.len(),
        nmse_median: median(&nmses).expect("non-empty"),
        nmse_q1: quantile(&nmses, 0.25).expect("non-empty"),
        nmse_q3: quantile(&nmses, 0.75).expect("non-empty"),
        residual_median: median(&residuals).expect("non-empty"),
        support_recovery_rate: (!support.is_empty())
            .then(|| support.iter().filter(|&&b| b).count() as f64 / support.len() as f64),
        iteration_cap_hits: rows.iter().filter(|r| !r.estimate.converged).count(),
    }
}

pub fn run(s: &SimulateSpec, out_dir: &Path, mut inputs: Inputs) -> CliResult<Manifest> {
    let p = load_codebook(&mut inputs, &s.codebook)?;
    let g = load_gains(&mut inputs, &s.gains)?;
    if g.len() != p.k() {
        return Err(CliError::usage(format!(
            "gains list has {} entries, codebook has K = {}",
            g.len(),
            p.k()
        )));
    }
    if let Some(a) = s.active {
        if a > p.k() {
            return Err(CliError::usage(format!("cannot activate {a} of {} users", p.k())));
        }
    }
    let d = build_design_matrix(&p)?;
    if s.method == crate::spec::MethodArg::Zf && !d.is_full_column_rank() {
        return Err(CliError::runtime(format!(
            "ZF needs full column rank, design matrix has rank {} < K = {}",
            d.rank(),
            d.k()
        )));
    }
    let trial = Trial {
        p: &p,
        d: &d,
        g: &g,
        s,
        cfg: NnlsConfig { kkt_tol: s.kkt_tol, max_iters: s.max_iters },
    };

    let jobs: Vec<(usize, u64)> = s
        .m
        .iter()
        .flat_map(|&m| (0..s.trials as u64).map(move |t| (m, t)))
        .collect();
    // Indexed collect keeps rows in job order whatever the thread count.
    let rows: Vec<TrialRow> = jobs
        .par_iter()
        .map(|&(m, t)| trial.run(m, t))
        .collect::<CliResult<_>>()?;

    let per_m: Vec<MSummary> = rows
        .chunks(s.trials)
        .zip(&s.m)
        .map(|(chunk, &m)| summarize(m, chunk))
        .collect();
    let cap_hits: usize = per_m.iter().map(|x| x.iteration_cap_hits).sum();
    let summary = Summary {
        method: s.method.into(),
        q: p.q(),
        k: p.k(),
        exact_covariance: s.exact_covariance,
        per_m,
        iteration_cap_hits: cap_hits,
    };

    let mut outputs = Outputs::new(out_dir)?;
    outputs.write("trials.csv", trials_csv(&rows).as_bytes())?;
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    outputs.write("summary.json", json.as_bytes())?;
    let manifest = outputs.finish("manifest.json", ExperimentSpec::Simulate(s.clone()), inputs)?;

    if cap_hits as f64 > MAX_CAP_FRACTION * rows.len() as f64 {
        return Err(CliError::runtime(format!(
            "solver hit its iteration cap in {cap_hits} of {} trials",
            rows.len()
        )));
    }
    Ok(manifest)
}
