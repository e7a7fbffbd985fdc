//! # noisekex
//!
//! A desk-scale simulation laboratory for thermal-noise secure key exchange.
//!
//! The crate models two schemes end to end:
//!
//! - **KLJN**, the wired Kirchhoff-law–Johnson-noise loop, where both parties
//!   connect one of an identical resistor pair to a shared wire and read the
//!   resulting mean-square noise level ([`kljn`]);
//! - **TherMod**, a proposed wireless adaptation in which a single
//!   transmitter modulates the variance of an amplified, broadcast noise
//!   signal ([`thermod`]).
//!
//! Around the two cores sit an eavesdropper ([`adversary`]), XOR privacy
//! amplification with analytic leakage tracking ([`distill`]), an analytic +
//! Monte Carlo bit-error model ([`errstat`]), power and energy accounting
//! ([`power`]), and a deterministic experiment harness with a claims checker
//! ([`harness`]).
//!
//! Every random quantity is reachable only through seeds derived from one
//! master seed ([`seeds`]), so any experiment re-runs bit-identically — on
//! any thread count.
//!
//! ```
//! use noisekex::kljn::{ResistorPair, BitState, ResistorChoice};
//! use noisekex::noise::NoiseSpec;
//!
//! let pair = ResistorPair::default_lab();
//! let spec = NoiseSpec::default_with_samples(2_000);
//! let state = BitState::new(ResistorChoice::High, ResistorChoice::Low);
//! let record = noisekex::kljn::run_bit_exchange(&pair, &spec, state, 7).unwrap();
//! let level = noisekex::kljn::classify_loop_level(&record, &pair, &spec);
//! // Bob holds Low, sees the mixed level, and decodes Alice's High.
//! assert_eq!(
//!     noisekex::kljn::party_decode(ResistorChoice::Low, level).unwrap(),
//!     ResistorChoice::High,
//! );
//! ```

// Validation predicates are written as `!(x > 0.0)` so NaN fails them too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::{Deserialize, Serialize};

pub mod adversary;
pub mod distill;
pub mod errstat;
pub mod harness;
pub mod kljn;
pub mod noise;
pub mod power;
pub mod seeds;
mod sim;
pub mod stats;
pub mod thermod;

/// Which of the two schemes an experiment or a power figure refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemKind {
    Kljn,
    Thermod,
}

impl std::fmt::Display for SystemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SystemKind::Kljn => write!(f, "kljn"),
            SystemKind::Thermod => write!(f, "thermod"),
        }
    }
}
