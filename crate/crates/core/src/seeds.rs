//! Deterministic seed derivation.
//!
//! Every random quantity in the crate is reachable only through seeds derived
//! from a single master seed via [`derive_seed`]. The scheme is a pure counter
//! construction: `derive_seed(master, domain, index)` mixes the master seed, a
//! domain label, and a per-item index through SplitMix64. Because the derived
//! seed depends only on `(master, domain, index)`, results are independent of
//! execution order and of how work is split across threads.
//!
//! Domain labels keep unrelated random streams (e.g. Alice's noise source vs.
//! Eve's coin flips) decoupled even when they share an index.

/// SplitMix64 finalizer. Full-period mixing of a 64-bit state.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// FNV-1a hash of a domain label.
fn domain_hash(domain: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in domain.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Derives the seed for item `index` of the stream named `domain` under
/// `master`. Stable across platforms, threads, and crate versions.
pub fn derive_seed(master: u64, domain: &str, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(domain_hash(domain) ^ splitmix64(index)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        assert_eq!(derive_seed(42, "kljn/bit", 7), derive_seed(42, "kljn/bit", 7));
    }

    #[test]
    fn distinct_across_inputs() {
        let base = derive_seed(42, "kljn/bit", 7);
        assert_ne!(base, derive_seed(43, "kljn/bit", 7));
        assert_ne!(base, derive_seed(42, "thermod/bit", 7));
        assert_ne!(base, derive_seed(42, "kljn/bit", 8));
    }

    #[test]
    fn index_stream_has_no_short_collisions() {
        let mut seen = std::collections::HashSet::new();
        for i in 0..100_000u64 {
            assert!(seen.insert(derive_seed(1, "collision-probe", i)));
        }
    }
}
