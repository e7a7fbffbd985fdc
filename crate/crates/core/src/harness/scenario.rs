//! Deterministic scenario execution.
//!
//! A scenario runs `n_bits` exchanges of the configured system, records every
//! bit, layers the eavesdropper on the same exchanges, then reports key
//! distillation and the power bill. Per-bit seeds come from the counter
//! scheme in [`crate::seeds`], so the outcome is a pure function of the
//! configuration — independent of thread count and execution order.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::adversary::{kljn_eve_guess, AttackSummary};
use crate::distill::{
    amplify, discard_non_secure, leakage_bits, DistillError, KeyMaterial,
};
use crate::harness::config::Scenario;
use crate::kljn::{party_decode, ExchangeClass, KljnError, LoopLevel};
use crate::power::{energy_per_final_bit, p_kljn, p_thermod, EnergyPerBit, PowerError};
use crate::sim;
use crate::thermod::{calibrate, ReceivePath, ThermodError};
use crate::SystemKind;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error(transparent)]
    Kljn(#[from] KljnError),
    #[error(transparent)]
    Thermod(#[from] ThermodError),
    #[error(transparent)]
    Distill(#[from] DistillError),
    #[error(transparent)]
    Power(#[from] PowerError),
}

/// One wired exchange as recorded by the harness.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KljnBitRecord {
    pub index: u64,
    pub alice_bit: bool,
    pub bob_bit: bool,
    pub class: ExchangeClass,
    pub u_w_mean_square: f64,
    pub i_w_mean_square: f64,
    pub level: LoopLevel,
    pub alice_decoded_bob: Option<bool>,
    pub bob_decoded_alice: Option<bool>,
    /// Both decodes succeeded and matched the true choices.
    pub decode_ok: bool,
    pub eve_guess_alice: bool,
    pub eve_guess_bob: bool,
    pub eve_certain: bool,
    /// Eve got the full (alice, bob) assignment right.
    pub eve_correct: bool,
}

/// One wireless transmission as recorded by the harness.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThermodBitRecord {
    pub index: u64,
    pub tx_bit: bool,
    pub rx_bit: bool,
    pub rx_margin: f64,
    pub rx_correct: bool,
    pub eve_bit: bool,
    pub eve_margin: f64,
    pub eve_correct: bool,
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioRecords {
    Kljn(Vec<KljnBitRecord>),
    Thermod(Vec<ThermodBitRecord>),
}

/// How many exchanges landed on each observed level (wired runs only).
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct ClassCounts {
    pub low_low: usize,
    pub mixed: usize,
    pub high_high: usize,
}

/// Distillation summary: what privacy amplification did to the raw key and to
/// Eve's per-bit model.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PaReport {
    pub iterations: u32,
    pub input_bits: usize,
    pub output_bits: usize,
    /// Eve's measured per-key-bit accuracy before amplification (clamped to
    /// the model domain [0.5, 1]).
    pub input_eve_prob: f64,
    pub output_eve_prob: f64,
    pub output_leakage_bits: f64,
    /// Raw bits consumed per final bit by amplification alone: 2^k.
    pub pa_cycle_multiplier: f64,
    /// Fraction of exchanges surviving the non-secure discard (1 for
    /// TherMod, which has no mixed/non-secure distinction).
    pub retained_fraction: f64,
    /// End-to-end raw exchanges per final key bit: 2^k / retained_fraction.
    pub raw_cost_per_final_bit: f64,
}

/// The power bill for this scenario's configuration.
#[derive(Debug, Clone, Serialize)]
pub struct PowerReport {
    pub p_kljn_watts: f64,
    pub p_thermod_watts: f64,
    pub energy: Vec<EnergyPerBit>,
}

/// Everything a scenario run produces.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioOutcome {
    pub system: SystemKind,
    pub master_seed: u64,
    pub n_bits: usize,
    pub legit_errors: usize,
    pub legit_error_rate: f64,
    pub attack: AttackSummary,
    /// Eve's per-key-bit (Alice-side or transmit-side) accuracy, the input
    /// to the distillation model.
    pub eve_key_bit_accuracy: f64,
    pub class_counts: Option<ClassCounts>,
    pub pa: PaReport,
    pub power: PowerReport,
    pub records: ScenarioRecords,
}

fn kljn_records(scenario: &Scenario) -> Result<Vec<KljnBitRecord>, KljnError> {
    let cfg = &scenario.config;
    (0..cfg.n_bits as u64)
        .into_par_iter()
        .map(|index| {
            let trial = sim::kljn_trial(&cfg.pair, &cfg.noise, cfg.master_seed, index)?;
            let guess = kljn_eve_guess(trial.level, trial.eve_seed);
            let alice_decoded_bob =
                party_decode(trial.state.alice, trial.level).ok().map(|c| c.bit());
            let bob_decoded_alice =
                party_decode(trial.state.bob, trial.level).ok().map(|c| c.bit());
            let decode_ok = alice_decoded_bob == Some(trial.state.bob.bit())
                && bob_decoded_alice == Some(trial.state.alice.bit());
            Ok(KljnBitRecord {
                index,
                alice_bit: trial.state.alice.bit(),
                bob_bit: trial.state.bob.bit(),
                class: trial.state.class(),
                u_w_mean_square: trial.record.u_w_mean_square,
                i_w_mean_square: trial.record.i_w_mean_square,
                level: trial.level,
                alice_decoded_bob,
                bob_decoded_alice,
                decode_ok,
                eve_guess_alice: guess.guessed_alice,
                eve_guess_bob: guess.guessed_bob,
                eve_certain: guess.certain,
                eve_correct: guess.guessed_alice == trial.state.alice.bit()
                    && guess.guessed_bob == trial.state.bob.bit(),
            })
        })
        .collect()
}

fn thermod_records(scenario: &Scenario) -> Result<Vec<ThermodBitRecord>, ThermodError> {
    let cfg = &scenario.config;
    let (amp, ch) = scenario.wireless.as_ref().expect("validated thermod scenario");
    let cal_rx = calibrate(&cfg.pair, &cfg.noise, amp, ch, ReceivePath::Receiver);
    let cal_eve = calibrate(&cfg.pair, &cfg.noise, amp, ch, ReceivePath::Eavesdropper);
    (0..cfg.n_bits as u64)
        .into_par_iter()
        .map(|index| {
            let trial = sim::thermod_trial(
                &cfg.pair,
                &cfg.noise,
                amp,
                ch,
                &cal_rx,
                &cal_eve,
                cfg.master_seed,
                index,
            )?;
            Ok(ThermodBitRecord {
                index,
                tx_bit: trial.tx_bit,
                rx_bit: trial.rx.bit,
                rx_margin: trial.rx.log_likelihood_margin,
                rx_correct: trial.rx.bit == trial.tx_bit,
                eve_bit: trial.eve.bit,
                eve_margin: trial.eve.log_likelihood_margin,
                eve_correct: trial.eve.bit == trial.tx_bit,
            })
        })
        .collect()
}

fn distill_report(
    key_bits: Vec<bool>,
    eve_key_bit_accuracy: f64,
    retained_fraction: f64,
    k: u32,
) -> Result<PaReport, DistillError> {
    let input_eve_prob = eve_key_bit_accuracy.clamp(0.5, 1.0);
    let input_bits = key_bits.len();
    let key = KeyMaterial::new(key_bits, input_eve_prob)?;
    let distilled = amplify(key, k)?;
    let pa_cycle_multiplier = 2f64.powi(k as i32);
    Ok(PaReport {
        iterations: k,
        input_bits,
        output_bits: distilled.len(),
        input_eve_prob,
        output_eve_prob: distilled.eve_correct_prob(),
        output_leakage_bits: leakage_bits(distilled.eve_correct_prob())?,
        pa_cycle_multiplier,
        retained_fraction,
        raw_cost_per_final_bit: if retained_fraction > 0.0 {
            pa_cycle_multiplier / retained_fraction
        } else {
            f64::INFINITY
        },
    })
}

/// The standard power rows for a budget: the bare cycle, `k` amplification
/// iterations at full retention, and the same with the non-secure half
/// discarded.
pub fn standard_power_report(
    budget: &crate::power::PowerBudget,
    system: SystemKind,
    k: u32,
) -> Result<PowerReport, PowerError> {
    Ok(PowerReport {
        p_kljn_watts: p_kljn(budget),
        p_thermod_watts: p_thermod(budget),
        energy: vec![
            energy_per_final_bit(budget, 0, 1.0, system)?,
            energy_per_final_bit(budget, k, 1.0, system)?,
            energy_per_final_bit(budget, k, 0.5, system)?,
        ],
    })
}

fn power_report(scenario: &Scenario, retained_fraction: f64) -> Result<PowerReport, PowerError> {
    let budget = &scenario.power;
    let system = scenario.system();
    let k = scenario.config.pa_iterations;
    let mut report = standard_power_report(budget, system, k)?;
    // Also price the actually measured retained fraction when it is usable.
    if retained_fraction > 0.0 && retained_fraction < 1.0 {
        report
            .energy
            .push(energy_per_final_bit(budget, k, retained_fraction, system)?);
    }
    Ok(report)
}

/// Runs the configured scenario to completion. Fully deterministic for a
/// fixed master seed, on any thread count.
pub fn run_scenario(scenario: &Scenario) -> Result<ScenarioOutcome, ScenarioError> {
    let cfg = &scenario.config;
    match scenario.system() {
        SystemKind::Kljn => {
            let records = kljn_records(scenario)?;
            let n = records.len();
            let legit_errors = records.iter().filter(|r| !r.decode_ok).count();
            let eve_correct = records.iter().filter(|r| r.eve_correct).count();
            let eve_certain = records.iter().filter(|r| r.eve_certain).count();
            let attack = AttackSummary {
                bits_attacked: n,
                bits_correct: eve_correct,
                accuracy: eve_correct as f64 / n as f64,
                certain_fraction: eve_certain as f64 / n as f64,
            };
            let eve_key_bit_accuracy = records
                .iter()
                .filter(|r| r.eve_guess_alice == r.alice_bit)
                .count() as f64
                / n as f64;
            let class_counts = ClassCounts {
                low_low: records.iter().filter(|r| r.level == LoopLevel::LowLow).count(),
                mixed: records.iter().filter(|r| r.level == LoopLevel::Mixed).count(),
                high_high: records
                    .iter()
                    .filter(|r| r.level == LoopLevel::HighHigh)
                    .count(),
            };
            // The shared key is Alice's bit sequence; discard keeps the
            // observed-mixed exchanges.
            let observed_classes: Vec<ExchangeClass> = records
                .iter()
                .map(|r| match r.level {
                    LoopLevel::LowLow => ExchangeClass::NonSecureLowLow,
                    LoopLevel::Mixed => ExchangeClass::SecureMixed,
                    LoopLevel::HighHigh => ExchangeClass::NonSecureHighHigh,
                })
                .collect();
            let alice_bits: Vec<bool> = records.iter().map(|r| r.alice_bit).collect();
            let discard = discard_non_secure(&observed_classes, &alice_bits)?;
            let pa = distill_report(
                alice_bits,
                eve_key_bit_accuracy,
                discard.retained_fraction,
                cfg.pa_iterations,
            )?;
            let power = power_report(scenario, discard.retained_fraction)?;
            Ok(ScenarioOutcome {
                system: SystemKind::Kljn,
                master_seed: cfg.master_seed,
                n_bits: n,
                legit_errors,
                legit_error_rate: legit_errors as f64 / n as f64,
                attack,
                eve_key_bit_accuracy,
                class_counts: Some(class_counts),
                pa,
                power,
                records: ScenarioRecords::Kljn(records),
            })
        }
        SystemKind::Thermod => {
            let records = thermod_records(scenario)?;
            let n = records.len();
            let legit_errors = records.iter().filter(|r| !r.rx_correct).count();
            let eve_correct = records.iter().filter(|r| r.eve_correct).count();
            let attack = AttackSummary {
                bits_attacked: n,
                bits_correct: eve_correct,
                accuracy: eve_correct as f64 / n as f64,
                certain_fraction: 0.0,
            };
            let tx_bits: Vec<bool> = records.iter().map(|r| r.tx_bit).collect();
            // No mixed-state discard exists here; every exchange is kept and
            // Eve's accuracy feeds the distillation model directly. From
            // accuracy ~ 1 the XOR recursion cannot escape: 1 is its fixed
            // point.
            let pa = distill_report(tx_bits, attack.accuracy, 1.0, cfg.pa_iterations)?;
            let power = power_report(scenario, 1.0)?;
            Ok(ScenarioOutcome {
                system: SystemKind::Thermod,
                master_seed: cfg.master_seed,
                n_bits: n,
                legit_errors,
                legit_error_rate: legit_errors as f64 / n as f64,
                attack,
                eve_key_bit_accuracy: attack.accuracy,
                class_counts: None,
                pa,
                power,
                records: ScenarioRecords::Thermod(records),
            })
        }
    }
}

/// One row of the amplification table emitted by the `amplify` subcommand.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AmplifyRow {
    pub iteration: u32,
    pub key_length: usize,
    pub eve_correct_prob: f64,
    pub leakage_bits: f64,
    /// Raw bits consumed per surviving bit so far: 2^iteration.
    pub cycle_multiplier: f64,
}

/// Generates a random raw key of `n_bits` under an Eve model with per-bit
/// accuracy `p0`, applies `k` XOR-halving iterations, and tabulates one row
/// per iteration (including iteration 0).
pub fn amplify_table(
    n_bits: usize,
    p0: f64,
    k: u32,
    seed: u64,
) -> Result<Vec<AmplifyRow>, DistillError> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let bits: Vec<bool> = (0..n_bits).map(|_| rng.random()).collect();
    let mut key = KeyMaterial::new(bits, p0)?;
    let mut rows = vec![AmplifyRow {
        iteration: 0,
        key_length: key.len(),
        eve_correct_prob: key.eve_correct_prob(),
        leakage_bits: leakage_bits(key.eve_correct_prob())?,
        cycle_multiplier: 1.0,
    }];
    for iteration in 1..=k {
        key = crate::distill::xor_halve(key)?;
        rows.push(AmplifyRow {
            iteration,
            key_length: key.len(),
            eve_correct_prob: key.eve_correct_prob(),
            leakage_bits: leakage_bits(key.eve_correct_prob())?,
            cycle_multiplier: 2f64.powi(iteration as i32),
        });
    }
    Ok(rows)
}
