/// SplitMix64: a small deterministic generator.
///
/// All randomness in the library (encoding coefficients, update coefficients,
/// internal rank probes) flows through seeded instances of this generator, so
/// a run is reproducible from its seed alone.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform value in `0..bound`. `bound` must be non-zero.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        // Rejection sampling on the top bits keeps the distribution exact.
        let bits = 64 - (bound - 1).leading_zeros().min(63);
        loop {
            let x = self.next_u64() >> (64 - bits);
            if x < bound {
                return x;
            }
        }
    }
}
