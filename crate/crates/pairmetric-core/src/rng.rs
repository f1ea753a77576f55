//! Deterministic randomness plumbing: seed derivation, counter-based
//! substreams, and a low-discrepancy sequence for model grids.
//!
//! Every stochastic routine in the crate takes an explicit 64-bit seed and
//! derives whatever independent streams it needs through [`derive_seed`] and
//! [`substream`]. Substreams are ChaCha streams under a shared key, so a
//! dataset can grow (more sample indices) without reshuffling the draws of
//! earlier samples.

use alloc::vec::Vec;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// One SplitMix64 step. Small, well-mixed, and good enough for deriving
/// sub-seeds; not used as a sampling RNG itself.
pub fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent sub-seed for the purpose tagged `tag`.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag.wrapping_mul(0xA076_1D64_78BD_642F)))
}

/// Counter-based substream: one ChaCha key per `seed`, one stream per index.
pub fn substream(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Radical inverse of `index` in the given base (van der Corput).
fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut frac = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * frac;
        index /= base;
        frac *= inv;
    }
    out
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut candidate: u64 = 2;
    while primes.len() < count {
        if primes.iter().all(|p| candidate % p != 0) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

/// Seeded Halton sequence over `[0,1)^dim`.
///
/// The seed only shifts the start index, so two sequences with the same seed
/// and dimension emit identical points.
pub struct HaltonSeq {
    bases: Vec<u64>,
    index: u64,
}

impl HaltonSeq {
    pub fn new(dim: usize, seed: u64) -> Self {
        // Skip the degenerate early prefix and decorrelate runs by seed.
        let index = 64 + (derive_seed(seed, 0x4a17) % 8192);
        HaltonSeq {
            bases: first_primes(dim),
            index,
        }
    }

    /// Next point; `out.len()` must equal the sequence dimension.
    pub fn next_point(&mut self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.bases.len());
        for (slot, &base) in out.iter_mut().zip(self.bases.iter()) {
            *slot = radical_inverse(self.index, base);
        }
        self.index += 1;
    }
}
