//! Scenario configuration: one TOML file with nested sections mirroring the
//! domain types. Unknown keys are hard errors — a silently ignored typo in a
//! physics parameter is the main foot-gun this format guards against — and
//! the master seed is mandatory, so nothing ever falls back to wall-clock
//! seeding.
//!
//! ```toml
//! system = "kljn"           # or "thermod"
//! master_seed = 42
//! n_bits = 10000
//! trials = 100000
//! pa_iterations = 4
//!
//! [pair]
//! r_low_ohms = 1000.0
//! r_high_ohms = 10000.0
//!
//! [noise]
//! temperature_kelvin = 300.0
//! bandwidth_hz = 1000.0
//! sampling_rate_hz = 2000.0
//! samples_per_bit = 10000
//!
//! [amplifier]               # required when system = "thermod"
//! gain = 1.0
//! added_noise_variance = 0.0
//! artifact_gain_ripple = 0.0
//! power_draw_watts = 1.0
//!
//! [channel]                 # required when system = "thermod"
//! gain_to_receiver = 1.0
//! gain_to_eavesdropper = 1.0
//! environment_noise_variance = 0.0
//! delay_taps = [{ delay_samples = 3, amplitude = 0.2 }]
//!
//! [power]                   # optional; defaults to the illustrative budget
//! amp_watts = 1.0
//! proc_watts = 0.4
//! antenna_watts = 0.0
//! bit_period_seconds = 1.0
//! kljn_components = [{ name = "rng", watts = 0.1 }]
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kljn::ResistorPair;
use crate::noise::NoiseSpec;
use crate::power::PowerBudget;
use crate::thermod::{AmplifierModel, ChannelModel};
use crate::SystemKind;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl std::fmt::Display) -> ConfigError {
    ConfigError::Invalid {
        field: field.to_string(),
        message: message.to_string(),
    }
}

/// The raw, serde-deserialized configuration. Call [`ScenarioConfig::validate`]
/// to obtain a [`Scenario`] whose sub-models have all been checked.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub system: SystemKind,
    pub master_seed: u64,
    pub n_bits: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_pa_iterations")]
    pub pa_iterations: u32,
    pub pair: ResistorPair,
    pub noise: NoiseSpec,
    #[serde(default)]
    pub amplifier: Option<AmplifierModel>,
    #[serde(default)]
    pub channel: Option<ChannelModel>,
    #[serde(default)]
    pub power: Option<PowerBudget>,
}

fn default_trials() -> usize {
    100_000
}

fn default_pa_iterations() -> u32 {
    4
}

impl ScenarioConfig {
    /// Desk-scale wired default: alpha = 10 pair, 10^4 samples per bit.
    pub fn default_kljn(master_seed: u64) -> Self {
        Self {
            system: SystemKind::Kljn,
            master_seed,
            n_bits: 10_000,
            trials: default_trials(),
            pa_iterations: default_pa_iterations(),
            pair: ResistorPair::default_lab(),
            noise: NoiseSpec::default_with_samples(10_000),
            amplifier: None,
            channel: None,
            power: None,
        }
    }

    /// Desk-scale wireless default: alpha = 10, identity channel, 100 samples
    /// per bit.
    pub fn default_thermod(master_seed: u64) -> Self {
        Self {
            system: SystemKind::Thermod,
            master_seed,
            n_bits: 10_000,
            trials: default_trials(),
            pa_iterations: default_pa_iterations(),
            pair: ResistorPair::default_lab(),
            noise: NoiseSpec::default_with_samples(100),
            amplifier: Some(AmplifierModel {
                power_draw_watts: 1.0,
                ..AmplifierModel::ideal()
            }),
            channel: Some(ChannelModel::identity()),
            power: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        Ok(toml::from_str(text)?)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self, ConfigError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    /// Checks every sub-model's invariants and resolves defaults, reporting
    /// the offending field on failure.
    pub fn validate(self) -> Result<Scenario, ConfigError> {
        if self.n_bits == 0 {
            return Err(invalid("n_bits", "must be >= 1"));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be >= 1"));
        }
        self.pair.validate().map_err(|e| invalid("pair", e))?;
        self.noise.validate().map_err(|e| invalid("noise", e))?;
        let wireless = match self.system {
            SystemKind::Kljn => None,
            SystemKind::Thermod => {
                let amp = self.amplifier.ok_or_else(|| {
                    invalid("amplifier", "section is required when system = \"thermod\"")
                })?;
                amp.validate().map_err(|e| invalid("amplifier", e))?;
                let ch = self.channel.clone().ok_or_else(|| {
                    invalid("channel", "section is required when system = \"thermod\"")
                })?;
                ch.validate().map_err(|e| invalid("channel", e))?;
                Some((amp, ch))
            }
        };
        let power = self
            .power
            .clone()
            .unwrap_or_else(PowerBudget::default_illustrative);
        power.validate().map_err(|e| invalid("power", e))?;
        Ok(Scenario {
            config: self,
            wireless,
            power,
        })
    }
}

/// A validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    /// Present exactly when the system is TherMod.
    pub wireless: Option<(AmplifierModel, ChannelModel)>,
    pub power: PowerBudget,
}

impl Scenario {
    pub fn system(&self) -> SystemKind {
        self.config.system
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const KLJN_TOML: &str = r#"
        system = "kljn"
        master_seed = 7
        n_bits = 64

        [pair]
        r_low_ohms = 1000.0
        r_high_ohms = 10000.0

        [noise]
        temperature_kelvin = 300.0
        bandwidth_hz = 1000.0
        sampling_rate_hz = 2000.0
        samples_per_bit = 500
    "#;

    #[test]
    fn parses_and_validates_a_kljn_config() {
        let scenario = ScenarioConfig::from_toml(KLJN_TOML).unwrap().validate().unwrap();
        assert_eq!(scenario.system(), SystemKind::Kljn);
        assert_eq!(scenario.config.n_bits, 64);
        assert_eq!(scenario.config.trials, 100_000); // default
        assert_eq!(scenario.config.pa_iterations, 4); // default
        assert!(scenario.wireless.is_none());
        // Default illustrative budget kicks in.
        assert_eq!(crate::power::p_kljn(&scenario.power), 0.5);
    }

    #[test]
    fn unknown_keys_are_hard_errors_naming_the_key() {
        let bad = KLJN_TOML.replace("n_bits = 64", "n_bits = 64\nbogus_knob = 3");
        let err = ScenarioConfig::from_toml(&bad).unwrap_err();
        assert!(err.to_string().contains("bogus_knob"), "{err}");

        let bad_nested = KLJN_TOML.replace("r_low_ohms", "r_low_ohmz");
        let err = ScenarioConfig::from_toml(&bad_nested).unwrap_err();
        assert!(err.to_string().contains("r_low_ohmz"), "{err}");
    }

    #[test]
    fn thermod_requires_its_sections() {
        let cfg = ScenarioConfig {
            system: SystemKind::Thermod,
            ..ScenarioConfig::default_kljn(1)
        };
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("amplifier"), "{err}");
    }

    #[test]
    fn semantic_validation_names_the_field() {
        let mut cfg = ScenarioConfig::default_kljn(1);
        cfg.pair.r_high_ohms = 1.0;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("pair"), "{err}");

        let mut cfg = ScenarioConfig::default_kljn(1);
        cfg.noise.sampling_rate_hz = 10.0;
        let err = cfg.validate().unwrap_err();
        assert!(err.to_string().contains("noise"), "{err}");
        assert!(err.to_string().contains("sampling_rate_hz"), "{err}");

        let mut cfg = ScenarioConfig::default_kljn(1);
        cfg.n_bits = 0;
        assert!(cfg.validate().unwrap_err().to_string().contains("n_bits"));
    }

    #[test]
    fn defaults_validate() {
        assert!(ScenarioConfig::default_kljn(1).validate().is_ok());
        assert!(ScenarioConfig::default_thermod(1).validate().is_ok());
    }
}
