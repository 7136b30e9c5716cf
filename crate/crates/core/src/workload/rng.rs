//! Seeded random source for workload generation.
//!
//! The generator is PCG-XSL-RR 128/64 (`Pcg64`). Its 128-bit state is filled
//! from the 64-bit seed with two rounds of SplitMix64, and the stream selector
//! is the task-type index, so each type draws from its own sequence. Uniform
//! reals are `(next_u64 >> 11) * 2^-53`. Everything here is integer or
//! IEEE-754 arithmetic, so the same seed gives the same draws on any platform.

use rand_core::Rng;
use rand_pcg::Pcg64;

fn splitmix64(x: &mut u64) -> u64 {
    *x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct SimRng {
    inner: Pcg64,
}

impl SimRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut sm = seed;
        let hi = splitmix64(&mut sm) as u128;
        let lo = splitmix64(&mut sm) as u128;
        Self { inner: Pcg64::new((hi << 64) | lo, stream as u128) }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}
