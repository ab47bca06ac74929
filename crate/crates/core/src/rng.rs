//! Seed derivation for reproducible, scheduling-independent random streams.
//!
//! Every mode of every replication owns a ChaCha8 stream keyed by
//! `(replication seed, mode index)`, so adding modes or reordering work never
//! changes the noise seen by an existing mode.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream selector offset for auxiliary draws that must not disturb the
/// primary Brownian increments of a mode.
const AUX_STREAM: u64 = 1 << 32;

/// SplitMix64 finaliser; a bijection on `u64`.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of replication `r`; injective in `r` for a fixed base.
pub fn replication_seed(seed_base: u64, replication: usize) -> u64 {
    mix64(seed_base.wrapping_add((replication as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)))
}

/// Primary stream of mode `mode` (0-based).
pub fn mode_rng(seed: u64, mode: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(mode as u64);
    rng
}

/// Auxiliary stream of mode `mode`, independent of [`mode_rng`].
pub fn mode_aux_rng(seed: u64, mode: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(AUX_STREAM + mode as u64);
    rng
}
