//! Validated, serializable parameter bundles for each command. These are
//! what a manifest records; output locations are kept out of them so a
//! manifest replays identically into any directory.

use clap::ValueEnum;
use pilotgain::codebooks::PackingConfig;
use pilotgain::estimator::Method;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::manifest::is_plain_name;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GenKind {
    GaussianComplex,
    GaussianReal,
    RandomPhase,
    Vandermonde,
    Grassmannian,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MethodArg {
    Nnls,
    Zf,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Method {
        match m {
            MethodArg::Nnls => Method::Nnls,
            MethodArg::Zf => Method::Zf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenSpec {
    pub kind: GenKind,
    pub q: usize,
    pub k: usize,
    pub seed: u64,
    /// Name of the codebook file inside the output directory.
    pub file_name: String,
    /// Packer settings; present only for Grassmannian codebooks.
    pub packing: Option<PackingConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSpec {
    pub codebook: String,
    pub require_full_rank: bool,
    pub format: Format,
    /// Report file name; `None` writes to stdout.
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum GainsSource {
    /// One linear gain per line.
    Gains { path: String },
    /// One distance per line, mapped to `d^(−alpha)`.
    Distances { path: String, alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    pub codebook: String,
    pub gains: GainsSource,
    /// True noise variance of the simulated channel.
    pub sigma_w2: f64,
    /// Noise variance the estimator subtracts; defaults to the true one.
    pub assumed_sigma_w2: Option<f64>,
    pub m: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub method: MethodArg,
    pub exact_covariance: bool,
    /// Number of users drawn active per trial; `None` keeps every user.
    pub active: Option<usize>,
    pub support_tol: f64,
    pub kkt_tol: f64,
    pub max_iters: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheorySpec {
    pub q_min: usize,
    pub q_max: usize,
    /// Sweep every `q < k ≤ q²` instead of only `k = q²`.
    pub all_k: bool,
    pub output: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReproduceSpec {
    pub figure: Figure,
    /// Range of `q` for fig1.
    pub q_min: usize,
    pub q_max: usize,
    /// Fixed `q` for fig2 and fig3.
    pub q: usize,
    /// Gaussian draws per point (fig1 takes their median).
    pub seeds: usize,
    pub seed: u64,
    pub packing: PackingConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum ExperimentSpec {
    CodebookGen(GenSpec),
    Analyze(AnalyzeSpec),
    Simulate(SimulateSpec),
    Theory(TheorySpec),
    Reproduce(ReproduceSpec),
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> CliResult<()> {
    if cond {
        Ok(())
    } else {
        Err(CliError::usage(msg()))
    }
}

fn check_packing(p: &PackingConfig) -> CliResult<()> {
    ensure(p.max_iters > 0 && p.restarts > 0 && p.tol > 0.0 && p.tol.is_finite(), || {
        format!("packing parameters must be positive, got {p:?}")
    })
}

fn check_name(name: &str) -> CliResult<()> {
    ensure(is_plain_name(name), || format!("output {name:?} must be a plain file name"))
}

impl ExperimentSpec {
    pub fn validate(&self) -> CliResult<()> {
        match self {
            ExperimentSpec::CodebookGen(s) => {
                ensure(s.q >= 1 && s.k >= 1, || format!("q and k must be ≥ 1, got q={}, k={}", s.q, s.k))?;
                if matches!(s.kind, GenKind::Vandermonde | GenKind::Grassmannian) {
                    ensure(s.k <= s.q * s.q, || {
                        format!("{:?} codebooks need k ≤ q² = {}, got k={}", s.kind, s.q * s.q, s.k)
                    })?;
                }
                match (&s.packing, s.kind) {
                    (Some(p), GenKind::Grassmannian) => check_packing(p)?,
                    (None, GenKind::Grassmannian) => return Err(CliError::usage("missing packing parameters")),
                    (Some(_), _) => return Err(CliError::usage("packing parameters apply only to grassmannian")),
                    (None, _) => {}
                }
                check_name(&s.file_name)
            }
            ExperimentSpec::Analyze(s) => s.output.as_deref().map_or(Ok(()), check_name),
            ExperimentSpec::Simulate(s) => {
                ensure(!s.m.is_empty() && s.m.iter().all(|&m| m >= 1), || "antenna counts must be ≥ 1".into())?;
                ensure(s.trials >= 1, || "trials must be ≥ 1".into())?;
                ensure(s.sigma_w2.is_finite() && s.sigma_w2 > 0.0, || {
                    format!("sigma-w2 must be > 0, got {}", s.sigma_w2)
                })?;
                if let Some(a) = s.assumed_sigma_w2 {
                    ensure(a.is_finite() && a >= 0.0, || format!("assumed-sigma-w2 must be ≥ 0, got {a}"))?;
                }
                if let GainsSource::Distances { alpha, .. } = s.gains {
                    ensure(alpha.is_finite() && alpha > 0.0, || format!("alpha must be > 0, got {alpha}"))?;
                }
                ensure(s.active != Some(0), || "active must be ≥ 1".into())?;
                ensure(s.support_tol.is_finite() && s.support_tol >= 0.0, || "support-tol must be ≥ 0".into())?;
                ensure(s.kkt_tol.is_finite() && s.kkt_tol > 0.0, || "kkt-tol must be > 0".into())?;
                ensure(s.max_iters != Some(0), || "max-iters must be ≥ 1".into())
            }
            ExperimentSpec::Theory(s) => {
                ensure(2 <= s.q_min && s.q_min <= s.q_max && s.q_max <= 1000, || {
                    format!("need 2 ≤ q-min ≤ q-max ≤ 1000, got {}..{}", s.q_min, s.q_max)
                })?;
                s.output.as_deref().map_or(Ok(()), check_name)
            }
            ExperimentSpec::Reproduce(s) => {
                ensure(2 <= s.q_min && s.q_min <= s.q_max && s.q_max <= 32, || {
                    format!("need 2 ≤ q-min ≤ q-max ≤ 32, got {}..{}", s.q_min, s.q_max)
                })?;
                ensure((2..=32).contains(&s.q), || format!("q must be in 2..=32, got {}", s.q))?;
                ensure(s.seeds >= 1, || "seeds must be ≥ 1".into())?;
                check_packing(&s.packing)
            }
        }
    }
}
