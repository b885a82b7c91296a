//! Seeded, platform-independent randomness.
//!
//! Every random draw in this crate flows through a ChaCha8 stream created
//! here. A 64-bit seed is expanded with SplitMix64 (`seed_from_u64`), and
//! independent substreams come from ChaCha's 64-bit stream field, so
//! parallel consumers can share one seed without coordinating draw order.
//! Floating-point variates use fixed constructions: 53-bit uniforms and
//! Box-Muller normals. Given (seed, stream, draw sequence), every value is
//! reproducible across platforms.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Stream = ChaCha8Rng;

/// Root stream for a seed (stream id 0).
pub fn stream(seed: u64) -> Stream {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Named substream: same key schedule as [`stream`], distinct counter stream.
pub fn substream(seed: u64, stream_id: u64) -> Stream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

/// Uniform draw in `[0, 1)` with 53-bit resolution.
pub fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in `(0, 1]`; safe as a logarithm argument.
fn positive_unit_f64(rng: &mut impl RngCore) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in `[0, n)`, bias-free via rejection sampling.
pub fn uniform_u64_below(rng: &mut impl RngCore, n: u64) -> u64 {
    assert!(n > 0, "uniform_u64_below requires n > 0");
    // Reject draws below 2^64 mod n so the remainder is exactly uniform.
    let threshold = n.wrapping_neg() % n;
    loop {
        let x = rng.next_u64();
        if x >= threshold {
            return x % n;
        }
    }
}

pub fn uniform_index(rng: &mut impl RngCore, n: usize) -> usize {
    uniform_u64_below(rng, n as u64) as usize
}

/// In-place Fisher-Yates shuffle.
pub fn shuffle<T>(items: &mut [T], rng: &mut impl RngCore) {
    for i in (1..items.len()).rev() {
        let j = uniform_index(rng, i + 1);
        items.swap(i, j);
    }
}

/// Standard normal variates via the Box-Muller transform.
///
/// Each pair of uniforms yields two normals; the second is cached. The
/// mapping from the underlying bit stream to values is fixed, so parameter
/// draws are bit-reproducible from the seed.
pub struct NormalSource {
    rng: Stream,
    spare: Option<f64>,
}

impl NormalSource {
    pub fn new(rng: Stream) -> Self {
        NormalSource { rng, spare: None }
    }

    pub fn next_normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = positive_unit_f64(&mut self.rng);
        let u2 = unit_f64(&mut self.rng);
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(radius * angle.sin());
        radius * angle.cos()
    }
}
