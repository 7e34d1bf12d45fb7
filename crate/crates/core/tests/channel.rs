use pilotgain::analysis::median;
use pilotgain::channel::{exact_covariance, simulate_trial, simulate_with_gains, ScenarioConfig};
use pilotgain::codebooks::gen_gaussian_complex;
use pilotgain::{CMatrix, CodebookKind, PilotCodebook, C64};
use rayon::prelude::*;

fn scenario(m: usize, trials: usize, seed: u64) -> ScenarioConfig {
    ScenarioConfig { g: vec![1.0, 0.3, 2.0, 0.0, 0.8], m, sigma_w2: 0.5, trials, seed }
}

fn rel_frob(a: &CMatrix, b: &CMatrix) -> f64 {
    (a - b).norm() / b.norm()
}

#[test]
fn noise_only_covariance_is_near_identity() {
    let p = gen_gaussian_complex(3, 4, 1).unwrap();
    let cfg = ScenarioConfig { g: vec![0.0; 4], m: 100_000, sigma_w2: 1.0, trials: 1, seed: 2 };
    let real = simulate_trial(&p, &cfg, 0).unwrap();
    let dev = (&real.sample_cov - CMatrix::identity(3, 3)).camax();
    assert!(dev < 2e-2, "{dev}");
}

#[test]
fn single_user_converges_to_rank_one() {
    let p = PilotCodebook::new(CMatrix::from_column_slice(2, 1, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]), CodebookKind::External).unwrap();
    let target = exact_covariance(&p, &[2.0], 0.0).unwrap();
    let err = |m| rel_frob(&simulate_with_gains(&p, &[2.0], m, 0.0, 3, 0).unwrap().sample_cov, &target);
    assert!(err(100_000) < err(100));
    assert!(err(100_000) < 2e-2);
}

#[test]
fn realization_satisfies_signal_model() {
    let p = gen_gaussian_complex(3, 5, 4).unwrap();
    let cfg = scenario(64, 1, 5);
    let r = simulate_trial(&p, &cfg, 7).unwrap();
    assert!((&r.y - (p.entries() * &r.h + &r.noise)).camax() < 1e-12);
    let s = &r.y * r.y.adjoint() / C64::new(64.0, 0.0);
    assert!((&r.sample_cov - s).camax() < 1e-12);
    assert_eq!(r.sample_cov, r.sample_cov.adjoint());
    // Inactive user has an all-zero channel row.
    assert!(r.h.row(3).iter().all(|z| *z == C64::new(0.0, 0.0)));
    let eig = r.sample_cov.clone().symmetric_eigen().eigenvalues;
    assert!(eig.iter().all(|&l| l > -1e-9));
    assert_eq!(r, simulate_trial(&p, &cfg, 7).unwrap());
}

#[test]
fn sample_covariance_is_unbiased() {
    let p = gen_gaussian_complex(3, 5, 6).unwrap();
    for m in [64usize, 256, 1024, 4096] {
        let trials = 50;
        let cfg = scenario(m, trials, 11);
        let mut acc = CMatrix::zeros(3, 3);
        for t in 0..trials as u64 {
            acc += simulate_trial(&p, &cfg, t).unwrap().sample_cov;
        }
        acc /= C64::new(trials as f64, 0.0);
        let target = exact_covariance(&p, &cfg.g, cfg.sigma_w2).unwrap();
        let err = rel_frob(&acc, &target);
        assert!(err < 3.0 / ((trials * m) as f64).sqrt(), "M={m}: {err}");
    }
}

fn median_error(p: &PilotCodebook, m: usize) -> f64 {
    let cfg = scenario(m, 20, 21);
    let target = exact_covariance(p, &cfg.g, cfg.sigma_w2).unwrap();
    let errs: Vec<f64> = (0..20u64)
        .map(|t| rel_frob(&simulate_trial(p, &cfg, t).unwrap().sample_cov, &target))
        .collect();
    median(&errs).unwrap()
}

#[test]
fn frobenius_error_decreases_with_m() {
    let p = gen_gaussian_complex(3, 5, 8).unwrap();
    let e: Vec<f64> = [64, 256, 1024, 4096].iter().map(|&m| median_error(&p, m)).collect();
    assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
}

#[test]
fn convergence_rate_is_inverse_square_root() {
    let p = gen_gaussian_complex(3, 5, 9).unwrap();
    let pts: Vec<(f64, f64)> = (6..=12)
        .map(|e| (f64::from(e) * 2f64.ln(), median_error(&p, 1 << e).ln()))
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    assert!((-0.6..=-0.4).contains(&slope), "slope {slope}");
}

#[test]
fn trials_are_order_independent() {
    let p = gen_gaussian_complex(4, 6, 10).unwrap();
    let cfg = ScenarioConfig { g: vec![1.0; 6], m: 32, sigma_w2: 1.0, trials: 16, seed: 12 };
    let forward: Vec<_> = (0..16u64).map(|t| simulate_trial(&p, &cfg, t).unwrap().sample_cov).collect();
    let mut reversed: Vec<_> = (0..16u64).rev().map(|t| (t, simulate_trial(&p, &cfg, t).unwrap().sample_cov)).collect();
    reversed.sort_by_key(|x| x.0);
    let parallel: Vec<_> = (0..16u64).into_par_iter().map(|t| simulate_trial(&p, &cfg, t).unwrap().sample_cov).collect();
    for t in 0..16 {
        assert_eq!(forward[t], reversed[t].1);
        assert_eq!(forward[t], parallel[t]);
    }
}
