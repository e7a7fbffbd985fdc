//! The wired KLJN loop: resistor selection, Kirchhoff loop signals, per-bit
//! mean-square measurement, level classification, and party-side decoding.
//!
//! Both ends hold an identical resistor pair (R_L, R_H) and connect one of the
//! two to the shared wire for each bit period. The wire voltage settles at the
//! resistive divider of the two noise sources and the loop current at their
//! difference over the series resistance. The mean-square wire voltage then
//! falls on one of three levels — low/low, mixed, high/high — of which only
//! the mixed level hides who holds which resistor.
//!
//! The loop is ideal and quasi-static: one common effective temperature, no
//! wire resistance, no capacitance, no propagation delay.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::noise::{generate_trace, NoiseError, NoiseSpec, NoiseTrace};

#[derive(Debug, Error)]
pub enum KljnError {
    #[error("invalid resistor pair: {message}")]
    InvalidPair { message: String },
    #[error("trace length mismatch: {left} vs {right} samples")]
    TraceMismatch { left: usize, right: usize },
    #[error("loop resistance must be positive, got {ohms} ohms")]
    NonPositiveLoopResistance { ohms: f64 },
    #[error("cannot decode: own choice {own:?} is inconsistent with loop level {level:?}")]
    InconsistentDecode { own: ResistorChoice, level: LoopLevel },
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// Which of the two resistors a party connects to the wire.
/// Bit mapping: `Low` reads as 0 and `High` as 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ResistorChoice {
    Low,
    High,
}

impl ResistorChoice {
    pub fn bit(self) -> bool {
        self == ResistorChoice::High
    }

    pub fn from_bit(bit: bool) -> Self {
        if bit {
            ResistorChoice::High
        } else {
            ResistorChoice::Low
        }
    }

    pub fn opposite(self) -> Self {
        match self {
            ResistorChoice::Low => ResistorChoice::High,
            ResistorChoice::High => ResistorChoice::Low,
        }
    }
}

/// The identical resistor pair held by both parties, R_H > R_L > 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResistorPair {
    pub r_low_ohms: f64,
    pub r_high_ohms: f64,
}

impl ResistorPair {
    pub fn new(r_low_ohms: f64, r_high_ohms: f64) -> Result<Self, KljnError> {
        let pair = Self {
            r_low_ohms,
            r_high_ohms,
        };
        pair.validate()?;
        Ok(pair)
    }

    /// Desk-scale default: 1 kOhm / 10 kOhm, so alpha = 10.
    pub fn default_lab() -> Self {
        Self::new(1e3, 1e4).expect("default pair is valid")
    }

    pub fn validate(&self) -> Result<(), KljnError> {
        if !(self.r_low_ohms > 0.0 && self.r_high_ohms > self.r_low_ohms) {
            return Err(KljnError::InvalidPair {
                message: format!(
                    "requires r_high > r_low > 0, got r_low = {}, r_high = {}",
                    self.r_low_ohms, self.r_high_ohms
                ),
            });
        }
        Ok(())
    }

    /// Resistance ratio alpha = R_H / R_L (> 1).
    pub fn alpha(&self) -> f64 {
        self.r_high_ohms / self.r_low_ohms
    }

    pub fn resistance(&self, choice: ResistorChoice) -> f64 {
        match choice {
            ResistorChoice::Low => self.r_low_ohms,
            ResistorChoice::High => self.r_high_ohms,
        }
    }
}

/// Joint resistor selection for one bit period. Reads as the two-bit label
/// (alice, bob) with Low = 0 and High = 1: LL = "00", LH = "01", HL = "10",
/// HH = "11".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BitState {
    pub alice: ResistorChoice,
    pub bob: ResistorChoice,
}

impl BitState {
    pub fn new(alice: ResistorChoice, bob: ResistorChoice) -> Self {
        Self { alice, bob }
    }

    pub fn class(&self) -> ExchangeClass {
        match (self.alice, self.bob) {
            (ResistorChoice::Low, ResistorChoice::Low) => ExchangeClass::NonSecureLowLow,
            (ResistorChoice::High, ResistorChoice::High) => ExchangeClass::NonSecureHighHigh,
            _ => ExchangeClass::SecureMixed,
        }
    }

    /// Two-bit label, e.g. "10" for (High, Low).
    pub fn label(&self) -> &'static str {
        match (self.alice, self.bob) {
            (ResistorChoice::Low, ResistorChoice::Low) => "00",
            (ResistorChoice::Low, ResistorChoice::High) => "01",
            (ResistorChoice::High, ResistorChoice::Low) => "10",
            (ResistorChoice::High, ResistorChoice::High) => "11",
        }
    }
}

/// Security class of a joint selection: only mixed states hide the bit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExchangeClass {
    NonSecureLowLow,
    SecureMixed,
    NonSecureHighHigh,
}

/// Measured statistics of one bit period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExchangeRecord {
    pub state: BitState,
    /// Mean-square wire voltage over the bit period (V^2).
    pub u_w_mean_square: f64,
    /// Mean-square loop current over the bit period (A^2).
    pub i_w_mean_square: f64,
    pub samples_used: usize,
}

/// The three mean-square wire-voltage levels an observer can resolve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LoopLevel {
    LowLow,
    Mixed,
    HighHigh,
}

/// Kirchhoff loop signals for two source traces behind series resistances:
/// `i_w[t] = (u_a[t] - u_b[t]) / (r_a + r_b)` and
/// `u_w[t] = (u_a[t] * r_b + u_b[t] * r_a) / (r_a + r_b)`.
pub fn loop_signals(
    u_a: &NoiseTrace,
    u_b: &NoiseTrace,
    r_a: f64,
    r_b: f64,
) -> Result<(NoiseTrace, NoiseTrace), KljnError> {
    if u_a.len() != u_b.len() {
        return Err(KljnError::TraceMismatch {
            left: u_a.len(),
            right: u_b.len(),
        });
    }
    let series = r_a + r_b;
    if !(series > 0.0) {
        return Err(KljnError::NonPositiveLoopResistance { ohms: series });
    }
    let mut wire = Vec::with_capacity(u_a.len());
    let mut current = Vec::with_capacity(u_a.len());
    for (a, b) in u_a.samples.iter().zip(&u_b.samples) {
        wire.push((a * r_b + b * r_a) / series);
        current.push((a - b) / series);
    }
    Ok((
        NoiseTrace {
            samples: wire,
            dt: u_a.dt,
        },
        NoiseTrace {
            samples: current,
            dt: u_a.dt,
        },
    ))
}

/// Runs one full bit period: both parties' thermal sources, the loop signals,
/// and the mean-square measurement over `spec.samples_per_bit` samples.
/// Deterministic for a fixed seed.
pub fn run_bit_exchange(
    pair: &ResistorPair,
    spec: &NoiseSpec,
    state: BitState,
    seed: u64,
) -> Result<ExchangeRecord, KljnError> {
    pair.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let seed_a: u64 = rng.random();
    let seed_b: u64 = rng.random();
    let r_a = pair.resistance(state.alice);
    let r_b = pair.resistance(state.bob);
    let u_a = generate_trace(r_a, spec, seed_a)?;
    let u_b = generate_trace(r_b, spec, seed_b)?;
    let (u_w, i_w) = loop_signals(&u_a, &u_b, r_a, r_b)?;
    Ok(ExchangeRecord {
        state,
        u_w_mean_square: u_w.mean_square(),
        i_w_mean_square: i_w.mean_square(),
        samples_used: spec.samples_per_bit,
    })
}

/// Theoretical mean-square wire-voltage levels `4kTB * R_parallel` for the
/// three classes, in increasing order: R_L/2, R_L || R_H, R_H/2.
pub fn theoretical_levels(pair: &ResistorPair, spec: &NoiseSpec) -> [f64; 3] {
    let scale = spec.thermal_scale();
    let rl = pair.r_low_ohms;
    let rh = pair.r_high_ohms;
    [
        scale * rl / 2.0,
        scale * rl * rh / (rl + rh),
        scale * rh / 2.0,
    ]
}

/// Classifies a measured mean-square wire voltage against the three
/// theoretical levels, nearest level in log space. The decision thresholds
/// are therefore the geometric means of adjacent levels; exact ties resolve
/// toward `Mixed`.
pub fn classify_loop_level(
    record: &ExchangeRecord,
    pair: &ResistorPair,
    spec: &NoiseSpec,
) -> LoopLevel {
    let [v_ll, v_mixed, v_hh] = theoretical_levels(pair, spec);
    let measured = record.u_w_mean_square;
    if measured <= 0.0 {
        return LoopLevel::LowLow;
    }
    let low_threshold = (v_ll * v_mixed).sqrt();
    let high_threshold = (v_mixed * v_hh).sqrt();
    if measured < low_threshold {
        LoopLevel::LowLow
    } else if measured > high_threshold {
        LoopLevel::HighHigh
    } else {
        LoopLevel::Mixed
    }
}

/// Recovers the peer's resistor choice from one's own choice and the observed
/// loop level. An inconsistent pair (e.g. own `Low` with level `HighHigh`)
/// signals a failed exchange that must be discarded.
pub fn party_decode(own: ResistorChoice, level: LoopLevel) -> Result<ResistorChoice, KljnError> {
    match (own, level) {
        (_, LoopLevel::Mixed) => Ok(own.opposite()),
        (ResistorChoice::Low, LoopLevel::LowLow) => Ok(ResistorChoice::Low),
        (ResistorChoice::High, LoopLevel::HighHigh) => Ok(ResistorChoice::High),
        (own, level) => Err(KljnError::InconsistentDecode { own, level }),
    }
}
