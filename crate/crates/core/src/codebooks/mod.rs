//! Pilot codebook families.
//!
//! Every generator is a pure function of its parameters and seed, and every
//! family is column-normalized so that `DᴴD` has a unit diagonal.

mod coherence;
mod format;
mod packing;

pub use coherence::{coherence_report, welch_bound, CoherenceReport, DEFAULT_FRAME_TOL};
pub use format::{read_codebook, write_codebook};
pub use packing::{gen_grassmannian, PackingConfig, PackingOutcome};

use std::f64::consts::TAU;

use rand::Rng;

use crate::model::{CodebookKind, PilotCodebook};
use crate::rng::{complex_normal, stream};
use crate::{CMatrix, CVector, Error, Result, C64};

fn check_dims(q: usize, k: usize) -> Result<()> {
    if q == 0 || k == 0 {
        return Err(Error::Dimension(format!("q and k must be ≥ 1, got q={q}, k={k}")));
    }
    Ok(())
}

/// I.i.d. CN(0,1) entries, columns normalized.
pub fn gen_gaussian_complex(q: usize, k: usize, seed: u64) -> Result<PilotCodebook> {
    check_dims(q, k)?;
    let mut rng = stream(seed, 0);
    let m = CMatrix::from_fn(q, k, |_, _| complex_normal(&mut rng));
    PilotCodebook::normalized(m, CodebookKind::GaussianComplex)
}

/// I.i.d. real N(0,1) entries, columns normalized.
pub fn gen_gaussian_real(q: usize, k: usize, seed: u64) -> Result<PilotCodebook> {
    check_dims(q, k)?;
    let mut rng = stream(seed, 0);
    let m = CMatrix::from_fn(q, k, |_, _| {
        let x: f64 = rng.sample(rand_distr::StandardNormal);
        C64::new(x, 0.0)
    });
    PilotCodebook::normalized(m, CodebookKind::GaussianReal)
}

/// Entries `e^{iθ}/√q` with `θ ~ U[0, 2π)` i.i.d.
pub fn gen_random_phase(q: usize, k: usize, seed: u64) -> Result<PilotCodebook> {
    check_dims(q, k)?;
    let mut rng = stream(seed, 0);
    let amp = 1.0 / (q as f64).sqrt();
    let m = CMatrix::from_fn(q, k, |_, _| {
        let theta = rng.random::<f64>() * TAU;
        C64::from_polar(amp, theta)
    });
    PilotCodebook::new(m, CodebookKind::RandomPhase)
}

/// Random Vandermonde generators: distinct moduli drawn from `[0.5, 2]` and
/// uniform phases.
pub fn random_vandermonde_generators(q: usize, seed: u64) -> CVector {
    let mut rng = stream(seed, 0);
    let mut gens: Vec<C64> = Vec::with_capacity(q);
    while gens.len() < q {
        let modulus = rng.random_range(0.5..=2.0);
        if gens.iter().any(|g: &C64| (g.norm() - modulus).abs() < 1e-3) {
            continue;
        }
        let theta = rng.random::<f64>() * TAU;
        gens.push(C64::from_polar(modulus, theta));
    }
    CVector::from_vec(gens)
}

/// Vandermonde pilots: row `i` holds the powers `a_i^0, a_i^1, …, a_i^{k−1}`,
/// after which each column is normalized.
///
/// When `generators` is `None` they are drawn with
/// [`random_vandermonde_generators`] from `seed`.
pub fn gen_vandermonde(
    q: usize,
    k: usize,
    generators: Option<&[C64]>,
    seed: u64,
) -> Result<PilotCodebook> {
    check_dims(q, k)?;
    if k > q * q {
        return Err(Error::Domain(format!("Vandermonde codebook needs k ≤ q² = {}, got k={k}", q * q)));
    }
    let owned;
    let gens: &[C64] = match generators {
        Some(g) => g,
        None => {
            owned = random_vandermonde_generators(q, seed);
            owned.as_slice()
        }
    };
    if gens.len() != q {
        return Err(Error::Dimension(format!("expected {q} generators, got {}", gens.len())));
    }
    if gens.iter().any(|g| !g.re.is_finite() || !g.im.is_finite()) {
        return Err(Error::Domain("non-finite Vandermonde generator".into()));
    }
    for i in 0..q {
        for j in i + 1..q {
            let scale = gens[i].norm().max(gens[j].norm()).max(1.0);
            if (gens[i] - gens[j]).norm() <= 1e-12 * scale {
                return Err(Error::DuplicateGenerators(i, j));
            }
        }
    }
    let m = CMatrix::from_fn(q, k, |row, col| gens[row].powu(col as u32));
    PilotCodebook::normalized(m, CodebookKind::Vandermonde)
}
