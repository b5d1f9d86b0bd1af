//! Deterministic, splittable random streams.
//!
//! Every random draw in the library comes from an [`RngStream`], a
//! counter-based generator whose output is a pure function of
//! `(master_seed, stream_id, position)`. Distinct stream ids give
//! statistically independent streams, so parallel trials fork one
//! substream per trial and the results do not depend on scheduling or
//! thread count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer, used to derive child stream ids.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(MIX_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A replayable random stream: ChaCha8 keyed by a 256-bit master seed,
/// positioned on a 64-bit stream lane.
#[derive(Clone, Debug)]
pub struct RngStream {
    master_seed: [u8; 32],
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    /// Root stream for a master seed.
    pub fn new(master_seed: [u8; 32], stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::from_seed(master_seed);
        inner.set_stream(stream_id);
        Self { master_seed, stream_id, inner }
    }

    /// Expands a short seed into a 256-bit master seed (SplitMix64 chain).
    pub fn from_seed_u64(seed: u64) -> Self {
        let mut bytes = [0u8; 32];
        let mut s = seed;
        for chunk in bytes.chunks_exact_mut(8) {
            s = mix64(s);
            chunk.copy_from_slice(&s.to_le_bytes());
        }
        Self::new(bytes, 0)
    }

    /// Derives an independent child stream. Children of distinct lanes,
    /// and of distinct parents, land on distinct ChaCha streams.
    pub fn substream(&self, lane: u64) -> Self {
        let child = mix64(self.stream_id.wrapping_mul(MIX_GAMMA) ^ mix64(lane));
        Self::new(self.master_seed, child)
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Current position within the stream (counter of 32-bit words).
    pub fn counter(&self) -> u128 {
        self.inner.get_word_pos()
    }

    /// Uniform draw from `[0, 1)`.
    pub fn uniform_f64(&mut self) -> f64 {
        // 53 random bits scaled into [0, 1).
        let bits = self.next_u64() >> 11;
        bits as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw from `[0, 2*pi)`.
    pub fn uniform_angle(&mut self) -> f64 {
        self.uniform_f64() * std::f64::consts::TAU
    }

    /// Standard normal via Box-Muller (two uniforms per pair of normals;
    /// we keep it stateless and draw a fresh pair each call).
    pub fn standard_normal(&mut self) -> f64 {
        use rand_distr::{Distribution, StandardNormal};
        StandardNormal.sample(&mut self.inner)
    }

    /// Uniform integer in `[0, n)`.
    pub fn below(&mut self, n: u64) -> u64 {
        use rand::Rng;
        self.inner.gen_range(0..n)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }
    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.inner.try_fill_bytes(dest)
    }
}
