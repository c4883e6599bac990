//! Seeded randomness. Every randomized routine takes an explicit seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::rational::{q, Q};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform integer in `[-bound, bound]` as a rational.
pub fn small_q(rng: &mut SeededRng, bound: i64) -> Q {
    q(rng.gen_range(-bound..=bound))
}

/// A point with small integer coordinates.
pub fn point(rng: &mut SeededRng, n: usize, bound: i64) -> Vec<Q> {
    (0..n).map(|_| small_q(rng, bound)).collect()
}
