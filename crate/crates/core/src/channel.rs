//! Seeded Monte-Carlo simulation of the received pilot block.
//!
//! For a codebook `P` (Q×K), gains `g` and noise variance `σ_w²`, one trial
//! draws `h` (K×M) with row `k` i.i.d. CN(0, g_k) and `w` (Q×M) i.i.d.
//! CN(0, σ_w²), and forms `Y = P·h + w` and `R̂ = Y·Yᴴ/M`.
//!
//! Trial `t` of a scenario with master seed `s` draws from
//! [`rng::stream(s, t)`](crate::rng::stream): `h` column by column, then `w`
//! column by column. Trials therefore reproduce independently of the order
//! or thread they run on.

use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use crate::model::PilotCodebook;
use crate::rng::{self, complex_normal};
use crate::{CMatrix, Error, Result, C64};

/// Default path-loss exponent for [`pathloss_gains`].
pub const DEFAULT_PATHLOSS_EXPONENT: f64 = 3.8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    /// Large-scale gains in linear power units; zero marks an inactive user.
    pub g: Vec<f64>,
    /// Number of receive antennas.
    pub m: usize,
    pub sigma_w2: f64,
    pub trials: usize,
    pub seed: u64,
}

impl ScenarioConfig {
    pub fn validate(&self, k: usize) -> Result<()> {
        if self.g.len() != k {
            return Err(Error::Dimension(format!(
                "gain vector has {} entries, codebook has {k} users",
                self.g.len()
            )));
        }
        if let Some(g) = self.g.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return Err(Error::Domain(format!("gain {g} must be finite and ≥ 0")));
        }
        if self.m == 0 || self.trials == 0 {
            return Err(Error::Domain("antenna count and trial count must be ≥ 1".into()));
        }
        if !(self.sigma_w2.is_finite() && self.sigma_w2 > 0.0) {
            return Err(Error::Domain(format!("noise variance {} must be > 0", self.sigma_w2)));
        }
        Ok(())
    }
}

/// One simulated coherence block.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub trial_index: u64,
    /// K×M; row `k` is user `k`'s channel across antennas.
    pub h: CMatrix,
    /// Q×M additive noise.
    pub noise: CMatrix,
    /// Q×M received block.
    pub y: CMatrix,
    /// `Y·Yᴴ/M`, exactly Hermitian.
    pub sample_cov: CMatrix,
}

fn check_gains(p: &PilotCodebook, g: &[f64]) -> Result<()> {
    if g.len() != p.k() {
        return Err(Error::Dimension(format!(
            "gain vector has {} entries, codebook has {} users",
            g.len(),
            p.k()
        )));
    }
    if let Some(x) = g.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::Domain(format!("gain {x} must be finite and ≥ 0")));
    }
    Ok(())
}

/// Draws trial `trial_index` of the scenario.
pub fn simulate_trial(
    p: &PilotCodebook,
    cfg: &ScenarioConfig,
    trial_index: u64,
) -> Result<ChannelRealization> {
    cfg.validate(p.k())?;
    simulate_with_gains(p, &cfg.g, cfg.m, cfg.sigma_w2, cfg.seed, trial_index)
}

/// Like [`simulate_trial`] with the gains supplied per call, for scenarios
/// where the set of active users changes from trial to trial.
pub fn simulate_with_gains(
    p: &PilotCodebook,
    g: &[f64],
    m: usize,
    sigma_w2: f64,
    seed: u64,
    trial_index: u64,
) -> Result<ChannelRealization> {
    check_gains(p, g)?;
    if m == 0 {
        return Err(Error::Domain("antenna count must be ≥ 1".into()));
    }
    if !(sigma_w2.is_finite() && sigma_w2 >= 0.0) {
        return Err(Error::Domain(format!("noise variance {sigma_w2} must be ≥ 0")));
    }
    let (q, k) = (p.q(), p.k());
    let mut rng = rng::stream(seed, trial_index);

    let amp: Vec<f64> = g.iter().map(|x| x.sqrt()).collect();
    let h = CMatrix::from_fn(k, m, |row, _| complex_normal(&mut rng) * amp[row]);
    let sigma = sigma_w2.sqrt();
    let noise = CMatrix::from_fn(q, m, |_, _| complex_normal(&mut rng) * sigma);

    let y = p.entries() * &h + &noise;
    let s = &y * y.adjoint() / C64::new(m as f64, 0.0);
    let sample_cov = (&s + s.adjoint()) * C64::new(0.5, 0.0);

    Ok(ChannelRealization {
        trial_index,
        h,
        noise,
        y,
        sample_cov,
    })
}

/// `P·diag(g)·Pᴴ + σ_w²·I`, the limit of the sample covariance as `M → ∞`.
pub fn exact_covariance(p: &PilotCodebook, g: &[f64], sigma_w2: f64) -> Result<CMatrix> {
    check_gains(p, g)?;
    if !(sigma_w2.is_finite() && sigma_w2 >= 0.0) {
        return Err(Error::Domain(format!("noise variance {sigma_w2} must be ≥ 0")));
    }
    let q = p.q();
    let mut scaled = p.entries().clone();
    for (mut col, &gk) in scaled.column_iter_mut().zip(g) {
        col.scale_mut(gk);
    }
    let r = &scaled * p.entries().adjoint() + CMatrix::identity(q, q) * C64::new(sigma_w2, 0.0);
    Ok((&r + r.adjoint()) * C64::new(0.5, 0.0))
}

/// Keeps a uniformly random subset of `active` users of `g` (drawn from a
/// stream salted with [`rng::ACTIVITY_SALT`]) and zeroes the rest.
pub fn sample_active_users(g: &[f64], active: usize, seed: u64, trial_index: u64) -> Result<Vec<f64>> {
    if active > g.len() {
        return Err(Error::Domain(format!(
            "cannot activate {active} of {} users",
            g.len()
        )));
    }
    let mut rng = rng::stream(seed ^ rng::ACTIVITY_SALT, trial_index);
    let mut out = vec![0.0; g.len()];
    for i in sample(&mut rng, g.len(), active) {
        out[i] = g[i];
    }
    Ok(out)
}

/// Gains `d^(−α)` from user distances.
pub fn pathloss_gains(distances: &[f64], exponent: f64) -> Result<Vec<f64>> {
    distances
        .iter()
        .map(|&d| {
            if d.is_finite() && d > 0.0 {
                Ok(d.powf(-exponent))
            } else {
                Err(Error::Domain(format!("distance {d} must be finite and > 0")))
            }
        })
        .collect()
}

/// Parses a gains file: one non-negative decimal per line. Blank lines are
/// ignored.
pub fn parse_gains(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let v: f64 = t
            .parse()
            .map_err(|_| Error::parse(i + 1, format!("invalid gain {t:?}")))?;
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::parse(i + 1, format!("gain {t:?} must be finite and ≥ 0")));
        }
        out.push(v);
    }
    if out.is_empty() {
        return Err(Error::parse(1, "no gains found"));
    }
    Ok(out)
}

/// Writes gains one per line in shortest round-trip form.
pub fn write_gains(g: &[f64]) -> String {
    g.iter().map(|v| format!("{v}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebooks::gen_gaussian_complex;
    use crate::model::CodebookKind;

    fn e1() -> PilotCodebook {
        PilotCodebook::new(
            CMatrix::from_column_slice(2, 1, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]),
            CodebookKind::External,
        )
        .unwrap()
    }

    fn cfg(g: Vec<f64>, m: usize, sigma_w2: f64) -> ScenarioConfig {
        ScenarioConfig {
            g,
            m,
            sigma_w2,
            trials: 1,
            seed: 11,
        }
    }

    #[test]
    fn noise_only_covariance_is_identity() {
        let p = gen_gaussian_complex(3, 4, 0).unwrap();
        let r = simulate_trial(&p, &cfg(vec![0.0; 4], 100_000, 1.0), 0).unwrap();
        let dev = (&r.sample_cov - CMatrix::identity(3, 3)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(dev < 2e-2, "deviation {dev}");
    }

    #[test]
    fn single_user_converges_to_rank_one() {
        let p = e1();
        let target = CMatrix::from_row_slice(2, 2, &[C64::new(2.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]);
        // σ_w² = 0 is allowed for direct simulation.
        let err = |m: usize| {
            let r = simulate_with_gains(&p, &[2.0], m, 0.0, 3, 0).unwrap();
            (&r.sample_cov - &target).norm()
        };
        let (small, large) = (err(100), err(100_000));
        assert!(large < small);
        assert!(large < 0.05, "{large}");
    }

    #[test]
    fn trials_are_deterministic_and_consistent() {
        let p = gen_gaussian_complex(3, 5, 2).unwrap();
        let c = cfg(vec![1.0, 0.5, 0.0, 2.0, 0.1], 64, 0.3);
        let a = simulate_trial(&p, &c, 4).unwrap();
        let b = simulate_trial(&p, &c, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.y, simulate_trial(&p, &c, 5).unwrap().y);
        let resid = &a.y - p.entries() * &a.h - &a.noise;
        assert!(resid.iter().all(|z| z.norm() < 1e-12));
        // Inactive user has an all-zero channel row.
        assert!(a.h.row(2).iter().all(|z| *z == C64::new(0.0, 0.0)));
        assert_eq!(a.sample_cov, a.sample_cov.adjoint());
    }

    #[test]
    fn exact_covariance_examples() {
        let p = gen_gaussian_complex(2, 3, 0).unwrap();
        let r = exact_covariance(&p, &[0.0; 3], 0.7).unwrap();
        assert!((r - CMatrix::identity(2, 2) * C64::new(0.7, 0.0)).norm() < 1e-15);

        let id = PilotCodebook::new(CMatrix::identity(2, 2), CodebookKind::External).unwrap();
        let r = exact_covariance(&id, &[3.0, 1.0], 1.0).unwrap();
        let expect = CMatrix::from_diagonal(&crate::CVector::from_vec(vec![C64::new(4.0, 0.0), C64::new(2.0, 0.0)]));
        assert_eq!(r, expect);
    }

    #[test]
    fn dimension_and_domain_errors() {
        let p = gen_gaussian_complex(2, 3, 0).unwrap();
        assert!(simulate_trial(&p, &cfg(vec![1.0; 2], 4, 1.0), 0).is_err());
        assert!(simulate_trial(&p, &cfg(vec![1.0, -1.0, 0.0], 4, 1.0), 0).is_err());
        assert!(simulate_trial(&p, &cfg(vec![1.0; 3], 0, 1.0), 0).is_err());
        assert!(simulate_trial(&p, &cfg(vec![1.0; 3], 4, 0.0), 0).is_err());
        assert!(exact_covariance(&p, &[1.0, f64::NAN, 0.0], 1.0).is_err());
    }

    #[test]
    fn active_user_sampling() {
        let g = [1.0, 2.0, 3.0, 4.0, 5.0];
        let a = sample_active_users(&g, 2, 9, 3).unwrap();
        assert_eq!(a, sample_active_users(&g, 2, 9, 3).unwrap());
        assert_eq!(a.iter().filter(|x| **x > 0.0).count(), 2);
        for (x, y) in a.iter().zip(&g) {
            assert!(*x == 0.0 || x == y);
        }
        assert!(sample_active_users(&g, 6, 0, 0).is_err());
    }

    #[test]
    fn pathloss() {
        let g = pathloss_gains(&[1.0, 2.0], DEFAULT_PATHLOSS_EXPONENT).unwrap();
        assert_eq!(g[0], 1.0);
        assert!((g[1] - 2f64.powf(-3.8)).abs() < 1e-15);
        assert!(pathloss_gains(&[0.0], 2.0).is_err());
    }

    #[test]
    fn gains_file() {
        assert_eq!(parse_gains("1.5\n0\n\n2e-3\n").unwrap(), vec![1.5, 0.0, 2e-3]);
        assert!(parse_gains("-1\n").is_err());
        assert!(parse_gains("abc\n").is_err());
        assert!(parse_gains("inf\n").is_err());
        assert!(parse_gains("\n\n").is_err());
        let g = vec![0.1, 1.0 / 3.0, 7.0];
        assert_eq!(parse_gains(&write_gains(&g)).unwrap(), g);
    }
}
