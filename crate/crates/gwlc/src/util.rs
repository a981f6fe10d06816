//! Small shared helpers.

/// SplitMix64 pseudo-random generator.
///
/// Used for phantom noise and randomized tests; self-contained so that
/// generated volumes are bit-identical across platforms and releases.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform value in `[0, bound)`.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        self.next_u64() % bound
    }

    /// Uniform signed value in `[-amplitude, amplitude]`.
    pub fn next_signed(&mut self, amplitude: u32) -> i64 {
        let span = 2 * amplitude as u64 + 1;
        self.next_below(span) as i64 - amplitude as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_stream() {
        let mut a = SplitMix64::new(7);
        let mut b = SplitMix64::new(7);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn signed_range() {
        let mut rng = SplitMix64::new(1);
        for _ in 0..1000 {
            let v = rng.next_signed(8);
            assert!((-8..=8).contains(&v));
        }
    }
}
