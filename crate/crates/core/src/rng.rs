//! Seed derivation. Every stochastic step draws from its own stream keyed by
//! `(seed, index, purpose)` so results do not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

pub type SimRng = ChaCha12Rng;

/// One step of the splitmix64 generator.
#[inline]
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stream purposes used when deriving per-TTI sub-seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Payload = 1,
    Snr = 2,
    Channel = 3,
    Noise = 4,
    Dither = 5,
    Init = 6,
    Shuffle = 7,
    Backoff = 8,
}

pub fn derive_seed(seed: u64, index: u64, stream: Stream) -> u64 {
    let mut s = seed ^ 0xA076_1D64_78BD_642F;
    let a = splitmix64(&mut s);
    let mut s = a ^ index.wrapping_mul(0xE703_7ED1_A0B4_28DB);
    let b = splitmix64(&mut s);
    let mut s = b ^ (stream as u64).wrapping_mul(0x8EBC_6AF0_9C88_C6E3);
    splitmix64(&mut s)
}

pub fn stream_rng(seed: u64, index: u64, stream: Stream) -> SimRng {
    SimRng::seed_from_u64(derive_seed(seed, index, stream))
}
