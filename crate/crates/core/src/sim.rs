//! Crate-internal per-bit trial drivers shared by the adversary, error-rate,
//! and scenario layers, so that every entry point sees identical exchanges
//! for identical `(master_seed, index)` pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::kljn::{
    classify_loop_level, run_bit_exchange, BitState, ExchangeRecord, KljnError, LoopLevel,
    ResistorChoice, ResistorPair,
};
use crate::noise::NoiseSpec;
use crate::seeds::derive_seed;
use crate::thermod::{
    transmit_bit, AmplifierModel, CalibrationTable, ChannelModel, Decision, ThermodError,
    variance_threshold_decide,
};

pub(crate) const KLJN_BIT_DOMAIN: &str = "kljn/bit";
pub(crate) const THERMOD_BIT_DOMAIN: &str = "thermod/bit";

pub(crate) struct KljnTrial {
    pub state: BitState,
    pub record: ExchangeRecord,
    pub level: LoopLevel,
    /// Seed reserved for Eve's mixed-state coin on this bit.
    pub eve_seed: u64,
}

/// One KLJN exchange with uniformly random independent party choices. Per-bit
/// randomness is drawn in a fixed order from a seed derived by the counter
/// scheme, so trials are reproducible independent of execution order.
pub(crate) fn kljn_trial(
    pair: &ResistorPair,
    spec: &NoiseSpec,
    master_seed: u64,
    index: u64,
) -> Result<KljnTrial, KljnError> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, KLJN_BIT_DOMAIN, index));
    let state = BitState::new(
        ResistorChoice::from_bit(rng.random()),
        ResistorChoice::from_bit(rng.random()),
    );
    let exchange_seed: u64 = rng.random();
    let eve_seed: u64 = rng.random();
    let record = run_bit_exchange(pair, spec, state, exchange_seed)?;
    let level = classify_loop_level(&record, pair, spec);
    Ok(KljnTrial {
        state,
        record,
        level,
        eve_seed,
    })
}

pub(crate) struct ThermodTrial {
    pub tx_bit: bool,
    pub rx: Decision,
    pub eve: Decision,
}

/// One TherMod transmission with a uniformly random bit, decided at both the
/// receiver and the eavesdropper against their own calibration tables.
#[allow(clippy::too_many_arguments)]
pub(crate) fn thermod_trial(
    pair: &ResistorPair,
    spec: &NoiseSpec,
    amp: &AmplifierModel,
    ch: &ChannelModel,
    cal_rx: &CalibrationTable,
    cal_eve: &CalibrationTable,
    master_seed: u64,
    index: u64,
) -> Result<ThermodTrial, ThermodError> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(master_seed, THERMOD_BIT_DOMAIN, index));
    let tx_bit: bool = rng.random();
    let tx_seed: u64 = rng.random();
    let (rx_trace, eve_trace) = transmit_bit(tx_bit, pair, spec, amp, ch, tx_seed)?;
    Ok(ThermodTrial {
        tx_bit,
        rx: variance_threshold_decide(&rx_trace, cal_rx)?,
        eve: variance_threshold_decide(&eve_trace, cal_eve)?,
    })
}
