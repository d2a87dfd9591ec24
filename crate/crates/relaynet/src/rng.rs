//! Counter-based seed derivation.
//!
//! Every random draw in a simulation is made from a ChaCha stream seeded by
//! hashing `(master_seed, tag, ...context)`. Draws are therefore pure
//! functions of their context: trials can run in any order on any number of
//! workers and still reproduce bit-identical results.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::network::Symbol;

pub(crate) const TAG_TRIAL: u64 = 0x01;
pub(crate) const TAG_CODEWORD: u64 = 0x02;
pub(crate) const TAG_RELAY: u64 = 0x03;
pub(crate) const TAG_PAIRS: u64 = 0x04;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash a sequence of words into a single seed.
pub(crate) fn mix(parts: &[u64]) -> u64 {
    let mut h = 0x243F_6A88_85A3_08D3u64;
    for &p in parts {
        h = splitmix(h ^ p);
    }
    splitmix(h ^ parts.len() as u64)
}

/// Fold a symbol block into an ongoing hash.
pub(crate) fn mix_symbols(seed: u64, block: &[Symbol]) -> u64 {
    let mut h = splitmix(seed ^ block.len() as u64);
    for chunk in block.chunks(4) {
        let mut word = 0u64;
        for (i, &s) in chunk.iter().enumerate() {
            word |= (s as u64 + 1) << (16 * i);
        }
        h = splitmix(h ^ word);
    }
    h
}

pub(crate) fn rng_from(parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix(parts))
}

/// Draw one symbol from the distribution `probs` by inverse CDF.
pub(crate) fn sample_symbol(rng: &mut ChaCha8Rng, probs: &[f64]) -> Symbol {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i as Symbol;
        }
    }
    // Rounding in the cumulative sum can leave a sliver above the last
    // boundary; attribute it to the final symbol.
    (probs.len() - 1) as Symbol
}

pub(crate) fn sample_block(rng: &mut ChaCha8Rng, probs: &[f64], n: usize) -> Vec<Symbol> {
    (0..n).map(|_| sample_symbol(rng, probs)).collect()
}

/// Robust typicality: every letter frequency is within a relative `delta`
/// of its probability, `|count(a)/n - p(a)| <= delta * p(a)`.
pub(crate) fn is_robustly_typical(seq: &[Symbol], probs: &[f64], delta: f64) -> bool {
    let n = seq.len() as f64;
    let mut counts = vec![0u64; probs.len()];
    for &s in seq {
        counts[s as usize] += 1;
    }
    counts
        .iter()
        .zip(probs)
        .all(|(&c, &p)| (c as f64 / n - p).abs() <= delta * p)
}
