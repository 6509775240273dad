//! Deterministic derivation of independent RNG streams.
//!
//! Every stochastic stage receives its own ChaCha8 stream whose seed is a
//! pure function of the master seed and the stage's indices (grid cell,
//! trial, …). Results are therefore identical regardless of execution order
//! or parallel scheduling.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Leading stream index of a single channel drop.
pub const STREAM_DROP: u64 = 1;
/// Leading stream index of the field-region probability sweep.
pub const STREAM_SWEEP: u64 = 2;
/// Leading stream index of the characterization comparison.
pub const STREAM_COMPARE: u64 = 3;

/// SplitMix64 finalizer-style mixing step.
fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mix a master seed with a list of stream indices into one 64-bit seed.
pub fn derive_seed(master: u64, indices: &[u64]) -> u64 {
    let mut state = master;
    let mut acc = splitmix64(&mut state);
    for &ix in indices {
        state ^= ix.wrapping_mul(0xff51_afd7_ed55_8ccd).rotate_left(17);
        acc ^= splitmix64(&mut state);
    }
    acc
}

/// Independent ChaCha8 stream for the given master seed and indices.
pub fn stream(master: u64, indices: &[u64]) -> ChaCha8Rng {
    let mut state = derive_seed(master, indices);
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}

// ---------------------------------------------------------------------------
