// SPDX-License-Identifier: Apache-2.0

//! Seeded random streams.
//!
//! Each record gets its own ChaCha8 stream (`seed`, stream id = record index),
//! so generation can run in parallel and still be bit-identical to a serial
//! run. Normals use the inverse-CDF method on a 53-bit open-interval uniform.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::special::normal_quantile;

/// Identifier of the generator recipe. Bump if any draw sequence changes.
pub const GENERATOR_ID: &str = "chacha8-stream-per-record/inverse-cdf-normal/v1";

pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Stream { rng }
    }

    /// Uniform on the open interval `(0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn standard_normal(&mut self) -> f64 {
        normal_quantile(self.uniform())
    }

    pub fn below(&mut self, n: u64) -> u64 {
        let zone = u64::MAX - (u64::MAX % n);
        loop {
            let v = self.rng.next_u64();
            if v < zone {
                return v % n;
            }
        }
    }
}

/// Seeded Fisher-Yates permutation of `0..n`.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    let mut s = Stream::new(seed, u64::MAX);
    for i in (1..n).rev() {
        let j = s.below(i as u64 + 1) as usize;
        idx.swap(i, j);
    }
    idx
}
