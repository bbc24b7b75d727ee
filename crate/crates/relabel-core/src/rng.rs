//! Self-contained deterministic pseudo-randomness.
//!
//! Everything that draws random numbers derives its seed from a root seed,
//! a purpose tag, and an index through [`derive_seed`], so results are
//! reproducible across runs, platforms, and thread counts, and no global
//! generator exists. The generator itself is a SplitMix64 stream: a 64-bit
//! counter passed through the SplitMix64 finalizer.

/// SplitMix64 finalizer (Steele, Lea, Flood 2014): the standard avalanche
/// mix of a 64-bit word.
#[inline]
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed = `splitmix64(splitmix64(root ^ mix(tag)) ^ mix(index))`
/// where `mix` is [`splitmix64`]. Distinct tags and indices give
/// independent streams from one root seed.
#[inline]
pub fn derive_seed(root: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(root ^ splitmix64(tag)) ^ splitmix64(index))
}

/// Purpose tags for [`derive_seed`].
pub mod tags {
    /// Ground-truth label sampling.
    pub const TRUTH: u64 = 1;
    /// Labelled source split used for confusion-matrix estimation.
    pub const SOURCE: u64 = 2;
    /// Target-set prediction batches.
    pub const PREDICTIONS: u64 = 3;
    /// Random selection policy draws.
    pub const SELECT: u64 = 4;
    /// Random classifier ordering.
    pub const ORDER: u64 = 5;
}

/// Counter-based SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct Rng {
    state: u64,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        // Finalize a copy so the state advance stays a plain counter.
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[0, n)`, unbiased via rejection sampling.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let zone = u64::MAX - (u64::MAX % n + 1) % n;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % n;
            }
        }
    }

    /// Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }

    /// Draw an index from a weight vector by inverse CDF. Weights need not
    /// be exactly normalized; the last positive weight absorbs rounding.
    pub fn sample_index(&mut self, weights: &[f64]) -> usize {
        let u = self.next_f64();
        let mut cum = 0.0;
        let mut last_positive = 0;
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                last_positive = i;
            }
            cum += w;
            if u < cum {
                return i;
            }
        }
        last_positive
    }
}
