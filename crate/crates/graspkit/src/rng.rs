//! Small deterministic random number generator used everywhere seeds appear.
//!
//! Every artifact this crate produces (datasets, reports, trained weights) is
//! required to be byte-identical across runs and machines for a given seed, so
//! the generator is implemented here rather than pulled from a crate whose
//! stream might change between versions. The core is SplitMix64, which is also
//! used as the mixing function for deriving per-record and per-cell seeds.

/// SplitMix64 pseudo-random generator.
///
/// Passes BigCrush, has a full 2^64 period, and each output is a pure function
/// of the (seed, step) pair, which makes derived counter-based streams cheap.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, n). Panics if n is 0.
    pub fn next_below(&mut self, n: usize) -> usize {
        assert!(n > 0, "next_below requires n > 0");
        let scaled = (self.next_f64() * n as f64) as usize;
        scaled.min(n - 1)
    }

    /// Uniform in [lo, hi).
    pub fn range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Log-uniform in [lo, hi]; both bounds must be positive.
    pub fn log_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo > 0.0 && hi >= lo);
        (self.range_f64(lo.ln(), hi.ln())).exp()
    }

    /// Standard normal via Box-Muller (one value per call).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64(); // (0, 1], keeps ln finite
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i + 1);
            items.swap(i, j);
        }
    }
}

/// Derives a new seed from a base seed and a list of context words.
///
/// Used for per-record, per-trial and per-cell streams: the derived stream is
/// independent of the order in which sibling streams are consumed.
pub fn mix_seed(base: u64, parts: &[u64]) -> u64 {
    let mut h = mix64(base.wrapping_add(GOLDEN_GAMMA));
    for &p in parts {
        h = mix64(h ^ p.wrapping_add(GOLDEN_GAMMA).wrapping_mul(0xD605_1A2E_5C6F_92C3 | 1));
    }
    h
}
