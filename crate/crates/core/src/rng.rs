//! Seeded random streams.
//!
//! Every random object of a run is drawn from a stream keyed by the master
//! seed and a label, never from a shared generator, so results do not depend
//! on the order in which workers happen to run.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Folds a sequence of words into one 64-bit key.
pub fn mix(words: &[u64]) -> u64 {
    words
        .iter()
        .fold(0x243f_6a88_85a3_08d3, |acc, &w| splitmix64(acc ^ splitmix64(w)))
}

/// The stream for `(master_seed, key...)`.
pub fn stream(master_seed: u64, key: &[u64]) -> StreamRng {
    let mut words = Vec::with_capacity(key.len() + 1);
    words.push(master_seed);
    words.extend_from_slice(key);
    ChaCha8Rng::seed_from_u64(mix(&words))
}

/// Uniform draw from the complex unit circle.
pub fn unit_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::from_polar(1.0, rng.random::<f64>() * TAU)
}

/// Stable labels for the [`stream`] keys used across the crate.
pub(crate) mod label {
    pub const PATCH: u64 = 2;
    pub const ROOT: u64 = 3;
    pub const REGEN_LINEAR: u64 = 4;
    pub const GAMMA_A: u64 = 5;
    pub const GAMMA_B: u64 = 6;
    pub const RANDOMIZE: u64 = 7;
    pub const POINT_ID: u64 = 8;
    pub const FAILURE_ID: u64 = 9;
}
