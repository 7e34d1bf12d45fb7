//! Counter-based seed splitting.
//!
//! Every random stream in the crate is a ChaCha8 generator keyed by a 64-bit
//! master seed and addressed by a 64-bit stream index (trial number, restart
//! number, ...). Streams are independent of each other and of the order in
//! which they are consumed, so parallel and serial runs agree bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::C64;

/// Salt mixed into the master seed for streams that must not collide with
/// the main per-trial streams (e.g. user-activity selection).
pub const ACTIVITY_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// One draw from CN(0, 1).
pub fn complex_normal<R: rand::Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}
