//! Reproducible random number streams.
//!
//! Every Monte Carlo replicate draws from its own ChaCha8 stream addressed by
//! `(seed, stream)`, so results never depend on which worker ran a replicate.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    /// Stream `stream + offset` under the same seed.
    pub fn substream(&self, offset: u64) -> Self {
        Self {
            seed: self.seed,
            stream: self.stream.wrapping_add(offset),
        }
    }

    /// A spec under a different seed derived from this one and `tag`. Used to
    /// obtain batches that never overlap the substreams of `self`.
    pub fn fork(&self, tag: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(tag)),
            stream: self.stream,
        }
    }

    pub fn generator(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Standard normal deviate. Drawn in `f64` so the same stream yields the same
/// sequence for every scalar type.
#[inline]
pub fn standard_normal<T: Scalar, R: rand::Rng + ?Sized>(rng: &mut R) -> T {
    let z: f64 = StandardNormal.sample(rng);
    T::of(z)
}

pub fn standard_normals<T: Scalar, R: rand::Rng + ?Sized>(rng: &mut R, len: usize) -> Vec<T> {
    (0..len).map(|_| standard_normal(rng)).collect()
}
