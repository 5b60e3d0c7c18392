//! Counter-based splittable random streams.
//!
//! Every replica draws from its own stream keyed by `(seed, stream id)`; a
//! draw is a pure function of `(key, counter)`, so trajectories are
//! bit-for-bit reproducible, replicas are independent by construction, and
//! coupled chains can share draws explicitly.  The generator is the
//! SplitMix64 finalizer over a Weyl sequence, which is the standard
//! splittable-stream construction.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug)]
pub struct StreamRng {
    key: u64,
    counter: u64,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let key = mix64(mix64(seed ^ GOLDEN).wrapping_add(mix64(stream ^ 0xD6E8_FEB8_6659_FD93)));
        Self { key, counter: 0 }
    }

    /// Derived stream, for nested replica structures.
    pub fn substream(&self, id: u64) -> Self {
        Self {
            key: mix64(self.key ^ mix64(id.wrapping_mul(GOLDEN) ^ 0xA076_1D64_78BD_642F)),
            counter: 0,
        }
    }

    /// Value of draw number `counter` (random access).
    #[inline]
    pub fn at(&self, counter: u64) -> u64 {
        mix64(self.key.wrapping_add(counter.wrapping_mul(GOLDEN)))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let v = self.at(self.counter);
        self.counter += 1;
        v
    }

    pub fn position(&self) -> u64 {
        self.counter
    }

    pub fn jump_to(&mut self, counter: u64) {
        self.counter = counter;
    }

    /// Uniform in the open interval (0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform integer in `0..n`.
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        // 128-bit multiply keeps the bias below 2^-64
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Exponential waiting time with the given rate.
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        -(1.0 - self.uniform()).ln() / rate
    }
}
