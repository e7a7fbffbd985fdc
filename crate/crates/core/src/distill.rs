//! XOR-based privacy amplification with analytic tracking of the
//! eavesdropper's per-bit correct probability.
//!
//! Each iteration XORs non-overlapping adjacent bit pairs, halving the key.
//! If Eve holds each input bit correctly with independent probability p, her
//! XOR of a pair is correct exactly when she is right on both or wrong on
//! both, so her probability becomes p^2 + (1-p)^2. Starting from p = 0.75,
//! four iterations drive her to 0.5 + 2^-17 at a cost of 16 raw bits per
//! final bit.

use serde::Serialize;
use thiserror::Error;

use crate::kljn::ExchangeClass;

#[derive(Debug, Error)]
pub enum DistillError {
    #[error("eavesdropper probability must lie in [0.5, 1], got {0}")]
    ProbabilityOutOfRange(f64),
    #[error("key of length {len} is too short: need at least {needed} bits")]
    KeyTooShort { len: usize, needed: usize },
    #[error("classes ({classes}) and bits ({bits}) are misaligned")]
    LengthMismatch { classes: usize, bits: usize },
}

/// A key with its tracked eavesdropper model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyMaterial {
    bits: Vec<bool>,
    /// Probability that Eve holds any given bit correctly, in [0.5, 1].
    eve_correct_prob: f64,
    pa_iterations_applied: u32,
}

impl KeyMaterial {
    pub fn new(bits: Vec<bool>, eve_correct_prob: f64) -> Result<Self, DistillError> {
        check_probability(eve_correct_prob)?;
        Ok(Self {
            bits,
            eve_correct_prob,
            pa_iterations_applied: 0,
        })
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn eve_correct_prob(&self) -> f64 {
        self.eve_correct_prob
    }

    pub fn pa_iterations_applied(&self) -> u32 {
        self.pa_iterations_applied
    }
}

fn check_probability(p: f64) -> Result<(), DistillError> {
    if !(0.5..=1.0).contains(&p) {
        return Err(DistillError::ProbabilityOutOfRange(p));
    }
    Ok(())
}

/// Eve's per-bit correct probability after one XOR-pair iteration:
/// p^2 + (1-p)^2. Fixed points at 0.5 and 1, monotone increasing on [0.5, 1].
pub fn eve_prob_after_iteration(p: f64) -> Result<f64, DistillError> {
    check_probability(p)?;
    let q = 1.0 - p;
    Ok(p * p + q * q)
}

/// One privacy-amplification iteration: output bit i is `bits[2i] XOR
/// bits[2i+1]`; a trailing odd bit is dropped.
pub fn xor_halve(key: KeyMaterial) -> Result<KeyMaterial, DistillError> {
    if key.bits.len() < 2 {
        return Err(DistillError::KeyTooShort {
            len: key.bits.len(),
            needed: 2,
        });
    }
    let bits = key.bits.chunks_exact(2).map(|pair| pair[0] ^ pair[1]).collect();
    Ok(KeyMaterial {
        bits,
        eve_correct_prob: eve_prob_after_iteration(key.eve_correct_prob)?,
        pa_iterations_applied: key.pa_iterations_applied + 1,
    })
}

/// Applies `k` XOR-halving iterations. Requires at least 2^k input bits; when
/// the length is a multiple of 2^k the output has exactly len / 2^k bits, a
/// raw-to-final ratio of 2^k.
pub fn amplify(key: KeyMaterial, k: u32) -> Result<KeyMaterial, DistillError> {
    let needed = 1usize
        .checked_shl(k)
        .ok_or(DistillError::KeyTooShort { len: key.bits.len(), needed: usize::MAX })?;
    if key.bits.len() < needed {
        return Err(DistillError::KeyTooShort {
            len: key.bits.len(),
            needed,
        });
    }
    let mut key = key;
    for _ in 0..k {
        key = xor_halve(key)?;
    }
    Ok(key)
}

/// Information leaked to Eve per key bit, in bits: 1 - H2(p) where H2 is the
/// binary entropy. Evaluated via ln_1p around p = 1/2 so values near the
/// secure fixed point (~1e-10 bits) keep full relative precision.
pub fn leakage_bits(p: f64) -> Result<f64, DistillError> {
    check_probability(p)?;
    if p == 1.0 {
        return Ok(1.0);
    }
    // With d = 2p - 1: 1 - H2(p) = [(1+d)ln(1+d) + (1-d)ln(1-d)] / (2 ln 2).
    let d = 2.0 * p - 1.0;
    Ok(((1.0 + d) * d.ln_1p() + (1.0 - d) * (-d).ln_1p()) / (2.0 * std::f64::consts::LN_2))
}

/// Result of discarding the non-secure exchanges from a raw key.
#[derive(Debug, Clone, Serialize)]
pub struct DiscardOutcome {
    pub key: KeyMaterial,
    /// Fraction of input exchanges retained (the mixed-state fraction).
    pub retained_fraction: f64,
}

/// Retains only the bits whose exchange class was `SecureMixed`. The retained
/// bits carry no level-observer information, so the output key's Eve model is
/// the indifferent 0.5.
pub fn discard_non_secure(
    classes: &[ExchangeClass],
    bits: &[bool],
) -> Result<DiscardOutcome, DistillError> {
    if classes.len() != bits.len() {
        return Err(DistillError::LengthMismatch {
            classes: classes.len(),
            bits: bits.len(),
        });
    }
    let retained: Vec<bool> = classes
        .iter()
        .zip(bits)
        .filter(|(class, _)| **class == ExchangeClass::SecureMixed)
        .map(|(_, bit)| *bit)
        .collect();
    let retained_fraction = if classes.is_empty() {
        0.0
    } else {
        retained.len() as f64 / classes.len() as f64
    };
    Ok(DiscardOutcome {
        key: KeyMaterial::new(retained, 0.5)?,
        retained_fraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn key_from_str(s: &str, p: f64) -> KeyMaterial {
        KeyMaterial::new(s.chars().map(|c| c == '1').collect(), p).unwrap()
    }

    fn bits_to_str(key: &KeyMaterial) -> String {
        key.bits().iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    #[test]
    fn recursion_fixed_points() {
        assert_eq!(eve_prob_after_iteration(0.5).unwrap(), 0.5);
        assert_eq!(eve_prob_after_iteration(1.0).unwrap(), 1.0);
    }

    #[test]
    fn recursion_from_three_quarters() {
        // 0.75 -> 0.625 -> 0.53125 -> 0.501953125 -> 0.5 + 2^-17, exactly
        // representable at every step.
        let mut p = 0.75;
        let expected = [0.625, 0.53125, 0.501953125, 0.5 + 2f64.powi(-17)];
        for e in expected {
            p = eve_prob_after_iteration(p).unwrap();
            assert_eq!(p, e);
        }
    }

    #[test]
    fn recursion_domain_is_enforced() {
        assert!(eve_prob_after_iteration(0.49).is_err());
        assert!(eve_prob_after_iteration(1.01).is_err());
        assert!(leakage_bits(0.2).is_err());
    }

    #[test]
    fn xor_halve_examples() {
        let key = key_from_str("1010", 0.75);
        let halved = xor_halve(key).unwrap();
        assert_eq!(bits_to_str(&halved), "11");
        assert_eq!(halved.eve_correct_prob(), 0.625);
        assert_eq!(halved.pa_iterations_applied(), 1);

        // All-zero keys stay all-zero.
        let zeros = KeyMaterial::new(vec![false; 16], 0.75).unwrap();
        let halved = xor_halve(zeros).unwrap();
        assert_eq!(halved.len(), 8);
        assert!(halved.bits().iter().all(|&b| !b));

        // Odd trailing bit is dropped: 5 -> 2.
        let odd = key_from_str("10111", 0.6);
        assert_eq!(xor_halve(odd).unwrap().len(), 2);

        assert!(xor_halve(key_from_str("1", 0.75)).is_err());
    }

    #[test]
    fn amplify_matches_the_headline_numbers() {
        let key = KeyMaterial::new(vec![true; 4096], 0.75).unwrap();
        let out = amplify(key, 4).unwrap();
        assert_eq!(out.len(), 256); // ratio exactly 16
        assert_eq!(out.eve_correct_prob(), 0.5 + 2f64.powi(-17));
        assert_eq!(out.pa_iterations_applied(), 4);
    }

    #[test]
    fn amplify_zero_iterations_is_identity() {
        let key = key_from_str("1100", 0.8);
        let same = amplify(key.clone(), 0).unwrap();
        assert_eq!(same, key);
    }

    #[test]
    fn amplify_needs_two_to_the_k_bits() {
        let key = KeyMaterial::new(vec![true; 15], 0.75).unwrap();
        assert!(matches!(
            amplify(key, 4),
            Err(DistillError::KeyTooShort { len: 15, needed: 16 })
        ));
    }

    #[test]
    fn leakage_endpoints_and_near_fixed_point() {
        assert_eq!(leakage_bits(0.5).unwrap(), 0.0);
        assert_eq!(leakage_bits(1.0).unwrap(), 1.0);
        // After four iterations from 0.75: about 1.68e-10 bits, far below the
        // 1e-8 design bound.
        let leak = leakage_bits(0.5 + 2f64.powi(-17)).unwrap();
        assert!(leak <= 1e-8, "leak = {leak}");
        assert!((1.5e-10..2.0e-10).contains(&leak), "leak = {leak}");
    }

    #[test]
    fn discard_keeps_only_mixed() {
        use ExchangeClass::*;
        let classes = [NonSecureLowLow, SecureMixed, NonSecureHighHigh, SecureMixed];
        let bits = [true, false, true, true];
        let out = discard_non_secure(&classes, &bits).unwrap();
        assert_eq!(out.key.bits(), &[false, true]);
        assert_eq!(out.retained_fraction, 0.5);

        let all_mixed = [SecureMixed; 3];
        let out = discard_non_secure(&all_mixed, &[true, true, false]).unwrap();
        assert_eq!(out.key.len(), 3);
        assert_eq!(out.retained_fraction, 1.0);

        let all_ll = [NonSecureLowLow; 3];
        let out = discard_non_secure(&all_ll, &[true, true, false]).unwrap();
        assert!(out.key.is_empty());
        assert_eq!(out.retained_fraction, 0.0);

        assert!(discard_non_secure(&all_ll, &[true]).is_err());
    }

    #[test]
    fn discard_of_uniform_choices_retains_about_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(88);
        let n = 10_000;
        let (classes, bits): (Vec<_>, Vec<_>) = (0..n)
            .map(|_| {
                use crate::kljn::{BitState, ResistorChoice};
                let state = BitState::new(
                    ResistorChoice::from_bit(rng.random()),
                    ResistorChoice::from_bit(rng.random()),
                );
                (state.class(), state.alice.bit())
            })
            .unzip();
        let out = discard_non_secure(&classes, &bits).unwrap();
        // Binomial(1e4, 0.5), 5-sigma interval.
        assert!((out.retained_fraction - 0.5).abs() < 0.025);
    }

    #[test]
    fn monte_carlo_validates_the_analytic_recursion() {
        // Eve holds each raw bit with independent probability p; halving her
        // guesses alongside the truth must track the recursion within 3 sigma.
        let n = 1 << 16;
        for &p0 in &[0.6f64, 0.75, 0.9] {
            let mut rng = ChaCha8Rng::seed_from_u64((p0 * 1000.0) as u64);
            let truth: Vec<bool> = (0..n).map(|_| rng.random()).collect();
            let eve: Vec<bool> = truth
                .iter()
                .map(|&b| if rng.random_bool(p0) { b } else { !b })
                .collect();
            let mut truth_key = KeyMaterial::new(truth, 0.5).unwrap();
            let mut eve_key = KeyMaterial::new(eve, 0.5).unwrap();
            let mut p = p0;
            for k in 1..=4u32 {
                truth_key = xor_halve(truth_key).unwrap();
                eve_key = xor_halve(eve_key).unwrap();
                p = p * p + (1.0 - p) * (1.0 - p);
                let matches = truth_key
                    .bits()
                    .iter()
                    .zip(eve_key.bits())
                    .filter(|(a, b)| a == b)
                    .count();
                let empirical = matches as f64 / truth_key.len() as f64;
                let sigma = (p * (1.0 - p) / truth_key.len() as f64).sqrt();
                assert!(
                    (empirical - p).abs() < 3.0 * sigma.max(1e-9),
                    "p0={p0} k={k}: empirical {empirical} vs analytic {p}"
                );
            }
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn recursion_is_monotone_on_its_domain(a in 0.5f64..=1.0, b in 0.5f64..=1.0) {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                prop_assert!(
                    eve_prob_after_iteration(lo).unwrap() <= eve_prob_after_iteration(hi).unwrap()
                );
            }

            #[test]
            fn recursion_strictly_shrinks_interior_points(p in 0.500001f64..0.999999) {
                let next = eve_prob_after_iteration(p).unwrap();
                prop_assert!(next < p);
                prop_assert!(next >= 0.5);
            }

            #[test]
            fn halving_floors_the_length(bits in proptest::collection::vec(any::<bool>(), 2..500)) {
                let n = bits.len();
                let key = KeyMaterial::new(bits, 0.75).unwrap();
                prop_assert_eq!(xor_halve(key).unwrap().len(), n / 2);
            }

            #[test]
            fn leakage_is_monotone(a in 0.5f64..=1.0, b in 0.5f64..=1.0) {
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                prop_assert!(leakage_bits(lo).unwrap() <= leakage_bits(hi).unwrap());
            }
        }
    }
}
