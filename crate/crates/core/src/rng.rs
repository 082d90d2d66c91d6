//! Seed derivation and RNG construction.
//!
//! Every random choice in this crate flows through a [`ChaCha8Rng`] seeded
//! either directly from a caller-supplied `u64` or from [`derive_seed`].
//! ChaCha8 is specified (rather than the process-default RNG) so that two
//! builds, or an implementation in another language, can regenerate
//! identical datasets and training runs from the same seed.
//!
//! Substream seeds are derived with a counter scheme: the master seed is
//! offset by `counter * GOLDEN_GAMMA` and passed through the SplitMix64
//! finalizer. The same scheme covers per-session generation, per-epoch
//! shuffles, and per-batch dropout masks.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Weyl increment used by SplitMix64 (2^64 / phi).
const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer. Bijective, so distinct counters never collide.
fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed for substream `counter` of `master`.
pub fn derive_seed(master: u64, counter: u64) -> u64 {
    splitmix64(master.wrapping_add(counter.wrapping_mul(GOLDEN_GAMMA)))
}

/// Build the crate-wide RNG from a seed.
pub fn new_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
