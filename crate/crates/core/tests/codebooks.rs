use pilotgain::codebooks::{
    coherence_report, gen_gaussian_complex, gen_gaussian_real, gen_grassmannian, gen_random_phase,
    gen_vandermonde, read_codebook, welch_bound, write_codebook, PackingConfig, DEFAULT_FRAME_TOL,
};
use pilotgain::model::{build_design_matrix, PilotCodebook};
use pilotgain::{CMatrix, CodebookKind, C64};
use proptest::prelude::*;

fn bits(p: &PilotCodebook) -> Vec<(u64, u64)> {
    p.entries().iter().map(|z| (z.re.to_bits(), z.im.to_bits())).collect()
}

fn unit_columns(p: &PilotCodebook) -> bool {
    (0..p.k()).all(|j| (p.entries().column(j).norm() - 1.0).abs() < 1e-12)
}

#[test]
fn generator_grid_invariants() {
    for q in 1..=5usize {
        for k in [1, q, q * q] {
            for seed in [0u64, 3, 99] {
                let gc = gen_gaussian_complex(q, k, seed).unwrap();
                assert!(unit_columns(&gc));
                assert_eq!(bits(&gc), bits(&gen_gaussian_complex(q, k, seed).unwrap()));

                let gr = gen_gaussian_real(q, k, seed).unwrap();
                assert!(unit_columns(&gr));
                assert!(gr.entries().iter().all(|z| z.im == 0.0));
                assert_eq!(bits(&gr), bits(&gen_gaussian_real(q, k, seed).unwrap()));

                let rp = gen_random_phase(q, k, seed).unwrap();
                assert!(unit_columns(&rp));
                let amp = 1.0 / (q as f64).sqrt();
                assert!(rp.entries().iter().all(|z| (z.norm() - amp).abs() < 1e-12));
                assert_eq!(bits(&rp), bits(&gen_random_phase(q, k, seed).unwrap()));

                let v = gen_vandermonde(q, k, None, seed).unwrap();
                assert!(unit_columns(&v));
                assert_eq!(bits(&v), bits(&gen_vandermonde(q, k, None, seed).unwrap()));
                // Within each column, consecutive rows stay in the generator's ratio.
                if k >= 2 {
                    let e = v.entries();
                    for row in 0..q {
                        let a = e[(row, 1)] / e[(row, 0)] * (e[(0, 0)] / e[(0, 1)]);
                        for col in 2..k {
                            let b = e[(row, col)] / e[(row, col - 1)] * (e[(0, col - 1)] / e[(0, col)]);
                            assert!((a - b).norm() < 1e-9 * a.norm().max(1.0));
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn vandermonde_rejects_duplicates_and_overload() {
    let g = [C64::new(1.5, 0.0), C64::new(1.5, 0.0)];
    assert!(gen_vandermonde(2, 4, Some(&g), 0).is_err());
    assert!(gen_vandermonde(2, 5, None, 0).is_err());
}

#[test]
fn gaussian_packings_exceed_welch() {
    for seed in 0..5u64 {
        let r = coherence_report(&gen_gaussian_complex(6, 36, seed).unwrap(), DEFAULT_FRAME_TOL);
        assert!(r.max_coherence > r.welch_bound);
        assert!(!r.is_full_frame);
    }
}

#[test]
fn packing_reaches_welch_on_small_frames() {
    for (q, k) in [(2usize, 4usize), (3, 9)] {
        let out = gen_grassmannian(q, k, &PackingConfig { restarts: 2, ..PackingConfig::with_seed(1) }).unwrap();
        assert!(out.max_coherence - welch_bound(q, k) < 2e-2, "({q},{k}) {}", out.max_coherence);
        assert!(out.max_coherence >= welch_bound(q, k) - 1e-9);
    }
    let out = gen_grassmannian(4, 4, &PackingConfig { restarts: 1, ..PackingConfig::with_seed(2) }).unwrap();
    assert!(out.max_coherence <= 1e-6);
}

#[test]
fn packing_best_so_far_is_monotone() {
    for seed in 0..3u64 {
        let out = gen_grassmannian(3, 7, &PackingConfig { restarts: 2, ..PackingConfig::with_seed(seed) }).unwrap();
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(*out.trace.last().unwrap(), out.max_coherence);
    }
}

#[test]
fn packing_is_schedule_independent() {
    let cfg = PackingConfig { restarts: 3, max_iters: 500, ..PackingConfig::with_seed(5) };
    let a = gen_grassmannian(3, 6, &cfg).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| gen_grassmannian(3, 6, &cfg).unwrap());
    assert_eq!(bits(&a.codebook), bits(&b.codebook));
    assert_eq!(a.restart, b.restart);
}

#[test]
fn full_frame_gives_constant_gram_off_diagonal() {
    let tol = DEFAULT_FRAME_TOL;
    let out = gen_grassmannian(3, 9, &PackingConfig { restarts: 2, ..PackingConfig::with_seed(1) }).unwrap();
    let rep = coherence_report(&out.codebook, tol);
    assert!(rep.is_full_frame);
    let c_d = rep.welch_bound.powi(2);
    let gram = build_design_matrix(&out.codebook).unwrap().gram().clone();
    for i in 0..9 {
        for j in 0..9 {
            if i != j {
                assert!((gram[(i, j)] - c_d).abs() <= 2.0 * tol, "({i},{j}) {}", gram[(i, j)]);
            }
        }
    }
}

fn arb_codebook() -> impl Strategy<Value = PilotCodebook> {
    (1usize..=5, 1usize..=12, any::<u64>(), 0usize..3).prop_map(|(q, k, seed, fam)| match fam {
        0 => gen_gaussian_complex(q, k, seed).unwrap(),
        1 => gen_gaussian_real(q, k, seed).unwrap(),
        _ => gen_random_phase(q, k, seed).unwrap(),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn welch_bound_is_a_floor(p in arb_codebook()) {
        let r = coherence_report(&p, DEFAULT_FRAME_TOL);
        if p.k() > p.q() {
            prop_assert!(r.max_coherence >= r.welch_bound - 1e-9);
        } else {
            prop_assert_eq!(r.welch_bound, 0.0);
        }
        prop_assert!(r.max_coherence <= 1.0 + 1e-12);
        prop_assert!(r.spread >= 0.0);
    }

    #[test]
    fn file_format_round_trips_bit_exactly(p in arb_codebook()) {
        let text = write_codebook(&p);
        let back = read_codebook(&text).unwrap();
        prop_assert_eq!(bits(&back), bits(&p));
        prop_assert_eq!(back.kind(), p.kind());
        prop_assert_eq!(write_codebook(&back), text);
    }

    #[test]
    fn external_unit_columns_round_trip(re in prop::collection::vec(-1e3f64..1e3, 6), im in prop::collection::vec(-1e3f64..1e3, 6)) {
        let m = CMatrix::from_fn(2, 3, |i, j| C64::new(re[i + 2 * j], im[i + 2 * j]));
        prop_assume!((0..3).all(|j| m.column(j).norm() > 1e-6));
        let p = PilotCodebook::normalized(m, CodebookKind::External).unwrap();
        prop_assert_eq!(bits(&read_codebook(&write_codebook(&p)).unwrap()), bits(&p));
    }
}
