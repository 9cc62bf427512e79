//! Deterministic, splittable random numbers.
//!
//! Parallel estimators must produce byte-identical results regardless of
//! worker count and evaluation order, so every sample draws from its own
//! generator seeded by `mix(master_seed, stream_id, index)`. The mixing
//! function is part of the output contract and is fixed bit-exactly:
//!
//! ```text
//! splitmix64(x):
//!     x += 0x9E3779B97F4A7C15
//!     z = x; z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!     return z ^ (z >> 31)            (state update returns x as new state)
//!
//! mix(master, stream, index):
//!     a = splitmix64_out(master  ^ (0x9E3779B97F4A7C15 * (stream + 1)))
//!     b = splitmix64_out(a       ^ (0xD1B54A32D192ED03 * (index  + 1)))
//!     return b
//! ```
//!
//! Streams are drawn with xoshiro256++ seeded by four successive
//! splitmix64 outputs of the mixed value. Uniform doubles take the top
//! 53 bits: `(next_u64() >> 11) * 2^-53`.

/// Stream identifiers, fixed so runs are reproducible across versions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamId {
    VolumeSampling = 1,
    Kushnirenko = 2,
    Conditions = 3,
    Correlation = 4,
    Bootstrap = 5,
    OrbitInit = 6,
}

#[inline]
fn splitmix64_out(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-sample seed derivation. Order-independent by construction.
#[inline]
pub fn mix(master_seed: u64, stream: StreamId, index: u64) -> u64 {
    let a = splitmix64_out(master_seed ^ 0x9E37_79B9_7F4A_7C15u64.wrapping_mul(stream as u64 + 1));
    splitmix64_out(a ^ 0xD1B5_4A32_D192_ED03u64.wrapping_mul(index.wrapping_add(1)))
}

/// xoshiro256++ generator; seeded from a single u64 via splitmix64.
#[derive(Debug, Clone)]
pub struct Rng {
    s: [u64; 4],
}

impl Rng {
    pub fn from_seed(seed: u64) -> Self {
        let mut sm = seed;
        let mut s = [0u64; 4];
        for slot in &mut s {
            sm = sm.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = sm;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            *slot = z ^ (z >> 31);
        }
        Rng { s }
    }

    /// Generator for sample `index` of `stream` under `master_seed`.
    pub fn for_sample(master_seed: u64, stream: StreamId, index: u64) -> Self {
        Self::from_seed(mix(master_seed, stream, index))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let result = (self.s[0].wrapping_add(self.s[3]))
            .rotate_left(23)
            .wrapping_add(self.s[0]);
        let t = self.s[1] << 17;
        self.s[2] ^= self.s[0];
        self.s[3] ^= self.s[1];
        self.s[1] ^= self.s[2];
        self.s[0] ^= self.s[3];
        self.s[2] ^= t;
        self.s[3] = self.s[3].rotate_left(45);
        result
    }

    /// Uniform in [0, 1).
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    #[inline]
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n).
    #[inline]
    pub fn below(&mut self, n: u64) -> u64 {
        // Multiply-shift; bias is < 2^-53 for the n used here.
        ((self.next_u64() >> 11) as u128 * n as u128 >> 53) as u64
    }
}
