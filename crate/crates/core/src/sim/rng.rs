// SPDX-License-Identifier: Apache-2.0

//! Seeded pseudo-random stall generator.
//!
//! The generator is pinned to the xorshift64* recurrence so that a seed
//! written in a config file reproduces the same stall pattern on every
//! platform and toolchain forever:
//!
//! ```text
//! x ^= x >> 12; x ^= x << 25; x ^= x >> 27;
//! output = x * 0x2545F4914F6CDD1D  (wrapping)
//! ```

/// xorshift64* stream. State must never be zero (the recurrence would stay
/// there), so seed 0 is mapped to the splitmix64 increment constant; every
/// `u64` is therefore a usable seed.
#[derive(Debug, Clone)]
pub struct XorShift64Star {
    state: u64,
}

impl XorShift64Star {
    pub fn new(seed: u64) -> Self {
        XorShift64Star {
            state: if seed == 0 { 0x9e37_79b9_7f4a_7c15 } else { seed },
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        let mut x = self.state;
        x ^= x >> 12;
        x ^= x << 25;
        x ^= x >> 27;
        self.state = x;
        x.wrapping_mul(0x2545_f491_4f6c_dd1d)
    }

    /// Uniform-ish draw in `[0, bound]` by modulo; the slight bias is
    /// irrelevant for stall lengths and keeps the draw a single output.
    pub fn next_at_most(&mut self, bound: u32) -> u32 {
        if bound == 0 {
            return 0;
        }
        (self.next_u64() % (bound as u64 + 1)) as u32
    }
}
