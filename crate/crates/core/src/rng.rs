//! Reproducible random streams.
//!
//! Every random draw in a simulation comes from a stream keyed by
//! `(master_seed, point, trial, purpose)`. Streams are independent of how
//! trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::Complex64;

pub type Stream = ChaCha8Rng;

/// What a stream is used for. Distinct purposes never share random bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    Geometry = 1,
    Channel = 2,
    Noise = 3,
    Scale = 4,
    Test = 99,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derive the stream for one `(point, trial, purpose)` under a master seed.
pub fn stream(master_seed: u64, point: u64, trial: u64, purpose: Purpose) -> Stream {
    let mut state = splitmix64(master_seed);
    let mut key = [0u8; 32];
    for (chunk, word) in key
        .chunks_exact_mut(8)
        .zip([point, trial, purpose as u64, 0x6972_732d_6d6d_7365])
    {
        state = splitmix64(state ^ word);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

/// One draw of `CN(0, variance)`: real and imaginary parts i.i.d. `N(0, variance/2)`.
pub fn complex_normal<R: rand::Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(s * re, s * im)
}
