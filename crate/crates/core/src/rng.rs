//! Counter-based seeding and the handful of variates the crate draws.
//!
//! Every random task is keyed by `(seed, stream, index)` and gets its own
//! ChaCha8 generator, so serial and parallel runs draw identical numbers.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub use rand_chacha::ChaCha8Rng as Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generator for task `(stream, index)` under a master seed.
pub fn task_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    let key = splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ index);
    ChaCha8Rng::seed_from_u64(key)
}

/// Uniform on [0, 1) with 53 random bits.
pub fn uniform<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform on (0, 1).
pub fn open_uniform<R: RngCore>(rng: &mut R) -> f64 {
    loop {
        let u = uniform(rng);
        if u > 0.0 {
            return u;
        }
    }
}

/// Standard normal via the Marsaglia polar method (one of the pair is discarded).
pub fn standard_normal<R: RngCore>(rng: &mut R) -> f64 {
    loop {
        let u = 2.0 * uniform(rng) - 1.0;
        let v = 2.0 * uniform(rng) - 1.0;
        let s = u * u + v * v;
        if s > 0.0 && s < 1.0 {
            return u * libm::sqrt(-2.0 * libm::log(s) / s);
        }
    }
}

/// Standard logistic via inverse CDF.
pub fn standard_logistic<R: RngCore>(rng: &mut R) -> f64 {
    let u = open_uniform(rng);
    libm::log(u / (1.0 - u))
}

/// Index drawn from a discrete distribution by inverse CDF. The last index
/// absorbs rounding in the cumulative sum.
pub fn categorical<R: RngCore>(rng: &mut R, probs: &[f64]) -> usize {
    let u = uniform(rng);
    let mut acc = 0.0;
    for (i, p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(probs.len() - 1)
}

/// Multinomial counts for `trials` draws over `probs`.
pub fn multinomial<R: RngCore>(rng: &mut R, trials: u64, probs: &[f64]) -> alloc::vec::Vec<u64> {
    let mut counts = alloc::vec![0u64; probs.len()];
    for _ in 0..trials {
        counts[categorical(rng, probs)] += 1;
    }
    counts
}
