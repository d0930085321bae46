//! Seeded random streams.
//!
//! Every randomized path draws from `ChaCha8Rng::seed_from_u64(seed)`; ChaCha
//! output is specified independently of platform and word size, so a seed
//! fixes the exact stream everywhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `len` i.i.d. standard normal draws.
pub fn standard_normal_vec(rng: &mut SeededRng, len: usize) -> Vec<f64> {
    (0..len).map(|_| StandardNormal.sample(rng)).collect()
}
