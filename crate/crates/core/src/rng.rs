//! Reproducible random streams.
//!
//! [`RngStream`] wraps ChaCha20, a counter-based generator: a 64-bit seed fixes
//! the key and a 64-bit stream id selects one of 2^64 non-overlapping
//! keystreams. Replications get their own stream id, so substreams never
//! share state and the result of a replication does not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Stream id reserved for the root stream of a seed.
const ROOT_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha20Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, ROOT_STREAM)
    }

    /// Substream `index` of `seed`. Distinct indices map to distinct ChaCha
    /// stream ids under the same key.
    pub fn split(seed: u64, index: u64) -> Self {
        assert!(index != ROOT_STREAM, "stream id u64::MAX is reserved");
        Self::with_stream(seed, index)
    }

    /// Child stream keyed by `key`, derived from this stream's identity (not
    /// its position), so it is the same no matter how many draws were made.
    pub fn substream(&self, key: u64) -> Self {
        if self.stream == ROOT_STREAM {
            return Self::split(self.seed, key);
        }
        let mixed = splitmix64(splitmix64(self.stream) ^ key.wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let seed = splitmix64(self.seed ^ mixed);
        Self::with_stream(seed, key)
    }

    fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha20Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, stream, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    /// Index drawn with probability proportional to `weights`. Consumes exactly
    /// one uniform draw.
    pub fn categorical<T: Real>(&mut self, weights: &[T]) -> Result<usize> {
        let mut total = 0.0;
        let mut last_positive = None;
        for (i, w) in weights.iter().enumerate() {
            let w = w.to_f64_lossy();
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::InvalidBelief(format!("weight {i} is {w}")));
            }
            if w > 0.0 {
                last_positive = Some(i);
            }
            total += w;
        }
        let last = last_positive.ok_or_else(|| Error::InvalidBelief("all weights zero".into()))?;
        let target = self.uniform() * total;
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate().take(last) {
            acc += w.to_f64_lossy();
            if target < acc {
                return Ok(i);
            }
        }
        Ok(last)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
