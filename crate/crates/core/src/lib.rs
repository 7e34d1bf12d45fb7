//! Large-scale channel-gain estimation for massive antenna-array base stations.
//!
//! Users transmit (generally non-orthogonal) pilot sequences over `Q` resource
//! elements. With many receive antennas the sample covariance of the received
//! pilot block converges to `P·diag(g)·Pᴴ + σ²I`, which is linear in the
//! per-user gains `g`. Vectorizing that relation gives `r = D·g` with
//! `D = [p₁*⊗p₁ … p_K*⊗p_K]`, solvable for up to `K = Q²` users.
//!
//! Modules:
//!
//! - [`model`]: codebook and design-matrix types, vectorization, numerical rank.
//! - [`codebooks`]: codebook generators, Grassmannian packing, coherence and the
//!   codebook text format.
//! - [`channel`]: seeded Monte-Carlo channel and received-block simulation.
//! - [`estimator`]: zero-forcing and non-negative least-squares gain recovery.
//! - [`analysis`]: noise-enhancement spectra and closed forms.

pub mod analysis;
pub mod channel;
pub mod codebooks;
pub mod error;
pub mod estimator;
pub mod model;
pub mod rng;

pub use nalgebra::Complex;

pub use error::{Error, Result};
pub use model::{CodebookKind, DesignMatrix, PilotCodebook, VecSystem};

/// Double-precision complex scalar used throughout the crate.
pub type C64 = Complex<f64>;
/// Dense complex matrix, column-major.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;
