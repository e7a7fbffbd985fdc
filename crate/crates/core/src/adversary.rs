//! Eve: the passive KLJN level observer and the TherMod intercept attack.
//!
//! Against the wired loop Eve resolves the same three mean-square levels the
//! parties do. The two non-secure levels hand her both choices outright; on
//! the mixed level the two assignments are statistically identical, so the
//! best she can do is a fair coin. With uniform party choices that comes to
//! half the bits known for certain and half guessed at even odds — a 75%
//! per-bit success rate, about 192 bits of a 256-bit raw key.
//!
//! Against the wireless chain there is no mixed-state ambiguity at all: the
//! signal is broadcast, so Eve runs the very same variance-threshold detector
//! as the legitimate receiver and succeeds exactly as often as the receiver
//! does.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::kljn::{KljnError, LoopLevel, ResistorPair};
use crate::noise::NoiseSpec;
use crate::sim;
use crate::thermod::{calibrate, AmplifierModel, ChannelModel, ReceivePath, ThermodError};

/// Eve's per-bit knowledge state for one KLJN exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EveKljnGuess {
    pub guessed_alice: bool,
    pub guessed_bob: bool,
    /// True exactly when the observed level was LowLow or HighHigh.
    pub certain: bool,
}

/// Whole-attack scoreboard.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AttackSummary {
    pub bits_attacked: usize,
    pub bits_correct: usize,
    pub accuracy: f64,
    /// Fraction of attacked bits on which Eve was certain (non-secure levels
    /// in KLJN; always 0 for the TherMod intercept, which has no certainty
    /// notion).
    pub certain_fraction: f64,
}

impl AttackSummary {
    fn from_counts(bits_attacked: usize, bits_correct: usize, certain: usize) -> Self {
        let n = bits_attacked.max(1) as f64;
        Self {
            bits_attacked,
            bits_correct,
            accuracy: bits_correct as f64 / n,
            certain_fraction: certain as f64 / n,
        }
    }
}

/// Eve's optimal guess given an observed loop level: non-secure levels reveal
/// both choices; the mixed level forces a fair coin between the two
/// assignments (1,0) and (0,1).
pub fn kljn_eve_guess(level: LoopLevel, seed: u64) -> EveKljnGuess {
    match level {
        LoopLevel::LowLow => EveKljnGuess {
            guessed_alice: false,
            guessed_bob: false,
            certain: true,
        },
        LoopLevel::HighHigh => EveKljnGuess {
            guessed_alice: true,
            guessed_bob: true,
            certain: true,
        },
        LoopLevel::Mixed => {
            let alice: bool = ChaCha8Rng::seed_from_u64(seed).random();
            EveKljnGuess {
                guessed_alice: alice,
                guessed_bob: !alice,
                certain: false,
            }
        }
    }
}

/// Simulates `n_bits` KLJN exchanges with uniform independent party choices
/// and scores Eve's full (alice, bob) guess on each. With error-free level
/// classification the expected accuracy is 0.75 and the expected certain
/// fraction 0.5; classification errors at small sample counts propagate into
/// both.
pub fn run_kljn_key_attack(
    n_bits: usize,
    pair: &ResistorPair,
    spec: &NoiseSpec,
    seed: u64,
) -> Result<AttackSummary, KljnError> {
    assert!(n_bits >= 1, "need at least one bit to attack");
    let per_bit: Vec<(bool, bool)> = (0..n_bits as u64)
        .into_par_iter()
        .map(|i| {
            let trial = sim::kljn_trial(pair, spec, seed, i)?;
            let guess = kljn_eve_guess(trial.level, trial.eve_seed);
            let correct = guess.guessed_alice == trial.state.alice.bit()
                && guess.guessed_bob == trial.state.bob.bit();
            Ok((correct, guess.certain))
        })
        .collect::<Result<_, KljnError>>()?;
    let correct = per_bit.iter().filter(|(c, _)| *c).count();
    let certain = per_bit.iter().filter(|(_, c)| *c).count();
    Ok(AttackSummary::from_counts(n_bits, correct, certain))
}

/// The TherMod intercept: Eve calibrates her own path and runs the
/// variance-threshold detector on her copy of each transmission.
pub fn run_thermod_intercept(
    n_bits: usize,
    pair: &ResistorPair,
    spec: &NoiseSpec,
    amp: &AmplifierModel,
    ch: &ChannelModel,
    seed: u64,
) -> Result<AttackSummary, ThermodError> {
    assert!(n_bits >= 1, "need at least one bit to attack");
    let cal_rx = calibrate(pair, spec, amp, ch, ReceivePath::Receiver);
    let cal_eve = calibrate(pair, spec, amp, ch, ReceivePath::Eavesdropper);
    let correct: usize = (0..n_bits as u64)
        .into_par_iter()
        .map(|i| {
            let trial = sim::thermod_trial(pair, spec, amp, ch, &cal_rx, &cal_eve, seed, i)?;
            Ok(usize::from(trial.eve.bit == trial.tx_bit))
        })
        .sum::<Result<usize, ThermodError>>()?;
    Ok(AttackSummary::from_counts(n_bits, correct, 0))
}
