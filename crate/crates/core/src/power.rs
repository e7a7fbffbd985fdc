//! Power and energy accounting.
//!
//! The wired scheme consumes power continuously in its auxiliary components
//! (noise generation, switching, measurement, statistics) even though the
//! information channel itself carries zero average power. The wireless chain
//! adds amplifier, signal-processing, and antenna draw on top:
//! `P_thermod = P_kljn + P_amp + P_proc (+ P_antenna)`. Privacy amplification
//! multiplies the number of exchange cycles per final key bit, and discarding
//! non-secure exchanges multiplies it again; both factors land directly on
//! the energy bill.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::SystemKind;

#[derive(Debug, Error)]
pub enum PowerError {
    #[error("component '{name}' has negative power {watts} W")]
    NegativeWatts { name: String, watts: f64 },
    #[error("bit period must be > 0 seconds, got {0}")]
    InvalidBitPeriod(f64),
    #[error("secure fraction must lie in (0, 1], got {0}")]
    InvalidSecureFraction(f64),
    #[error("secure fraction is zero: no secure bits can ever be produced")]
    NoSecureBits,
}

/// One named continuously-powered component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentPower {
    pub name: String,
    pub watts: f64,
}

impl ComponentPower {
    pub fn new(name: impl Into<String>, watts: f64) -> Self {
        Self {
            name: name.into(),
            watts,
        }
    }
}

/// Named component powers plus the wireless additions and the cycle length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerBudget {
    pub kljn_components: Vec<ComponentPower>,
    #[serde(default)]
    pub amp_watts: f64,
    #[serde(default)]
    pub proc_watts: f64,
    /// Antenna draw; defaults to 0 so the three-term wireless sum is the
    /// default behavior while antenna systems remain representable.
    #[serde(default)]
    pub antenna_watts: f64,
    pub bit_period_seconds: f64,
}

impl PowerBudget {
    /// Illustrative desk-scale budget. These wattages are placeholders for
    /// making the ratios concrete, not measurements of any real hardware.
    pub fn default_illustrative() -> Self {
        Self {
            kljn_components: vec![
                ComponentPower::new("rng", 0.1),
                ComponentPower::new("switch", 0.02),
                ComponentPower::new("measurement", 0.3),
                ComponentPower::new("statistics", 0.08),
            ],
            amp_watts: 1.0,
            proc_watts: 0.4,
            antenna_watts: 0.0,
            bit_period_seconds: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), PowerError> {
        for c in &self.kljn_components {
            if !(c.watts >= 0.0) {
                return Err(PowerError::NegativeWatts {
                    name: c.name.clone(),
                    watts: c.watts,
                });
            }
        }
        for (name, watts) in [
            ("amp_watts", self.amp_watts),
            ("proc_watts", self.proc_watts),
            ("antenna_watts", self.antenna_watts),
        ] {
            if !(watts >= 0.0) {
                return Err(PowerError::NegativeWatts {
                    name: name.to_string(),
                    watts,
                });
            }
        }
        if !(self.bit_period_seconds > 0.0) {
            return Err(PowerError::InvalidBitPeriod(self.bit_period_seconds));
        }
        Ok(())
    }

    pub fn system_power(&self, system: SystemKind) -> f64 {
        match system {
            SystemKind::Kljn => p_kljn(self),
            SystemKind::Thermod => p_thermod(self),
        }
    }
}

/// Total continuous power of the wired scheme: the sum of its component draws.
pub fn p_kljn(budget: &PowerBudget) -> f64 {
    budget.kljn_components.iter().map(|c| c.watts).sum()
}

/// Total continuous power of the wireless scheme:
/// `p_kljn + amp + proc + antenna`.
pub fn p_thermod(budget: &PowerBudget) -> f64 {
    p_kljn(budget) + budget.amp_watts + budget.proc_watts + budget.antenna_watts
}

/// Energy cost of one final (secure, distilled) key bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyPerBit {
    pub system: SystemKind,
    pub pa_iterations: u32,
    pub secure_fraction: f64,
    /// Raw exchange cycles consumed per final key bit: 2^k / secure_fraction.
    pub cycle_multiplier: f64,
    pub joules: f64,
}

/// Energy per final key bit after discarding non-secure exchanges (keeping a
/// fraction `secure_fraction`) and applying `k` privacy-amplification
/// iterations: `(2^k / secure_fraction) * bit_period * system_power`.
pub fn energy_per_final_bit(
    budget: &PowerBudget,
    k: u32,
    secure_fraction: f64,
    system: SystemKind,
) -> Result<EnergyPerBit, PowerError> {
    budget.validate()?;
    if secure_fraction == 0.0 {
        return Err(PowerError::NoSecureBits);
    }
    if !(secure_fraction > 0.0 && secure_fraction <= 1.0) {
        return Err(PowerError::InvalidSecureFraction(secure_fraction));
    }
    let cycle_multiplier = 2f64.powi(k as i32) / secure_fraction;
    Ok(EnergyPerBit {
        system,
        pa_iterations: k,
        secure_fraction,
        cycle_multiplier,
        joules: cycle_multiplier * budget.bit_period_seconds * budget.system_power(system),
    })
}
