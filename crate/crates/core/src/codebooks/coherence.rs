use serde::{Deserialize, Serialize};

use crate::model::PilotCodebook;

/// Default tolerance for the equiangular ("full frame") test.
pub const DEFAULT_FRAME_TOL: f64 = 1e-3;

/// Pairwise coherence summary of a unit-norm codebook.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    /// `max_{i≠j} |p_iᴴ p_j|`.
    pub max_coherence: f64,
    pub min_coherence: f64,
    pub welch_bound: f64,
    /// `max_coherence − min_coherence`.
    pub spread: f64,
    /// Every off-diagonal coherence is within tolerance of the Welch bound.
    pub is_full_frame: bool,
}

/// Lower bound `sqrt((K−Q)/(Q(K−1)))` on the coherence of `K` unit vectors in
/// `Q` dimensions; zero when `K ≤ Q`.
pub fn welch_bound(q: usize, k: usize) -> f64 {
    if k <= q {
        return 0.0;
    }
    (((k - q) as f64) / ((q * (k - 1)) as f64)).sqrt()
}

/// Exhaustive pairwise scan of `|p_iᴴ p_j|`.
pub fn coherence_report(p: &PilotCodebook, tol: f64) -> CoherenceReport {
    let (q, k) = (p.q(), p.k());
    let g = p.inner_products();
    let welch = welch_bound(q, k);
    let mut max_c: f64 = 0.0;
    let mut min_c = f64::INFINITY;
    let mut full = true;
    for j in 0..k {
        for i in 0..j {
            let c = g[(i, j)].norm();
            max_c = max_c.max(c);
            min_c = min_c.min(c);
            full &= (c - welch).abs() <= tol;
        }
    }
    if k < 2 {
        min_c = 0.0;
    }
    CoherenceReport {
        max_coherence: max_c,
        min_coherence: min_c,
        welch_bound: welch,
        spread: max_c - min_c,
        is_full_frame: full,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codebooks::gen_gaussian_complex;
    use crate::model::CodebookKind;
    use crate::{CMatrix, C64};

    #[test]
    fn welch_values() {
        assert_eq!(welch_bound(3, 9), 0.5);
        assert!((welch_bound(2, 4) - (2.0f64 / 6.0).sqrt()).abs() < 1e-15);
        assert_eq!(welch_bound(4, 4), 0.0);
        assert_eq!(welch_bound(4, 2), 0.0);
    }

    #[test]
    fn identity_has_zero_coherence() {
        let p = PilotCodebook::new(CMatrix::identity(3, 3), CodebookKind::External).unwrap();
        let r = coherence_report(&p, DEFAULT_FRAME_TOL);
        assert_eq!(r.max_coherence, 0.0);
        assert_eq!(r.welch_bound, 0.0);
        assert!(r.is_full_frame);
    }

    /// Hesse SIC in dimension 3: 9 vectors with all pairwise |⟨·,·⟩| = 1/2.
    fn hesse_sic() -> PilotCodebook {
        let w = C64::from_polar(1.0, std::f64::consts::TAU / 3.0);
        let s = 1.0 / 2f64.sqrt();
        let fiducial = [C64::new(0.0, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)];
        let mut cols = Vec::new();
        for a in 0..3 {
            for b in 0..3 {
                // X^a Z^b applied to the fiducial.
                let v: Vec<C64> = (0..3)
                    .map(|i| {
                        let src = (i + 3 - a) % 3;
                        fiducial[src] * w.powu((b * src) as u32)
                    })
                    .collect();
                cols.extend(v);
            }
        }
        PilotCodebook::new(CMatrix::from_column_slice(3, 9, &cols), CodebookKind::External).unwrap()
    }

    #[test]
    fn sic_meets_welch_bound() {
        let r = coherence_report(&hesse_sic(), DEFAULT_FRAME_TOL);
        assert!((r.max_coherence - 0.5).abs() < 1e-12);
        assert!((r.min_coherence - 0.5).abs() < 1e-12);
        assert!(r.is_full_frame);
    }

    #[test]
    fn random_codebooks_are_not_optimal() {
        for seed in 0..5 {
            let r = coherence_report(&gen_gaussian_complex(6, 36, seed).unwrap(), DEFAULT_FRAME_TOL);
            assert!(r.max_coherence > r.welch_bound);
            assert!(!r.is_full_frame);
        }
    }
}
