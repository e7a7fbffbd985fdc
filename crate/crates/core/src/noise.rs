//! Johnson–Nyquist thermal noise synthesis.
//!
//! A resistor R at temperature T observed over bandwidth B carries a
//! fluctuating voltage with mean-square value 4·k_B·T·R·B. Traces are
//! generated as white Gaussian sequences at the sampling rate and interpreted
//! as already band-limited to B: the protocol statistics depend only on the
//! per-sample variance and on sample independence, so no explicit filter is
//! applied.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380649e-23;

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("invalid noise spec: {field}: {message}")]
    InvalidSpec {
        field: &'static str,
        message: String,
    },
    #[error("resistance must be non-negative, got {ohms} ohms")]
    NegativeResistance { ohms: f64 },
}

/// Unit system for noise variances.
///
/// `Normalized` sets 4·k_B·T·B ≡ 1 so variances are O(R); long accumulations
/// then stay well away from f64 underflow. Results in the two systems agree
/// after rescaling by the physical 4·k_B·T·B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitSystem {
    #[default]
    Physical,
    Normalized,
}

/// Temperature, bandwidth, and sampling parameters shared by every noise
/// source in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub temperature_kelvin: f64,
    pub bandwidth_hz: f64,
    pub sampling_rate_hz: f64,
    pub samples_per_bit: usize,
    #[serde(default)]
    pub units: UnitSystem,
}

impl NoiseSpec {
    pub fn new(
        temperature_kelvin: f64,
        bandwidth_hz: f64,
        sampling_rate_hz: f64,
        samples_per_bit: usize,
    ) -> Result<Self, NoiseError> {
        let spec = Self {
            temperature_kelvin,
            bandwidth_hz,
            sampling_rate_hz,
            samples_per_bit,
            units: UnitSystem::Physical,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Same parameters, but with variances expressed in units where
    /// 4·k_B·T·B ≡ 1.
    pub fn normalized(mut self) -> Self {
        self.units = UnitSystem::Normalized;
        self
    }

    /// Desk-scale default: 300 K, 1 kHz bandwidth, 2 kHz sampling.
    pub fn default_with_samples(samples_per_bit: usize) -> Self {
        Self::new(300.0, 1e3, 2e3, samples_per_bit).expect("default spec is valid")
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(self.temperature_kelvin > 0.0) {
            return Err(NoiseError::InvalidSpec {
                field: "temperature_kelvin",
                message: format!("must be > 0, got {}", self.temperature_kelvin),
            });
        }
        if !(self.bandwidth_hz > 0.0) {
            return Err(NoiseError::InvalidSpec {
                field: "bandwidth_hz",
                message: format!("must be > 0, got {}", self.bandwidth_hz),
            });
        }
        if !(self.sampling_rate_hz >= 2.0 * self.bandwidth_hz) {
            return Err(NoiseError::InvalidSpec {
                field: "sampling_rate_hz",
                message: format!(
                    "must satisfy the Nyquist bound 2 x bandwidth = {}, got {}",
                    2.0 * self.bandwidth_hz,
                    self.sampling_rate_hz
                ),
            });
        }
        if self.samples_per_bit < 2 {
            return Err(NoiseError::InvalidSpec {
                field: "samples_per_bit",
                message: format!("must be >= 2, got {}", self.samples_per_bit),
            });
        }
        Ok(())
    }

    /// The 4·k_B·T·B factor (1 in normalized units): variance per ohm.
    pub fn thermal_scale(&self) -> f64 {
        match self.units {
            UnitSystem::Physical => {
                4.0 * BOLTZMANN * self.temperature_kelvin * self.bandwidth_hz
            }
            UnitSystem::Normalized => 1.0,
        }
    }

    /// Seconds per sample.
    pub fn dt(&self) -> f64 {
        1.0 / self.sampling_rate_hz
    }

    pub fn with_samples_per_bit(mut self, samples_per_bit: usize) -> Self {
        self.samples_per_bit = samples_per_bit;
        self
    }
}

/// A finite sampled record of one noise voltage.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrace {
    pub samples: Vec<f64>,
    /// Seconds per sample; 1 / sampling_rate of the generating spec.
    pub dt: f64,
}

impl NoiseTrace {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean of squared samples, the statistic every detector in this crate
    /// thresholds on.
    pub fn mean_square(&self) -> f64 {
        crate::stats::mean_square(&self.samples)
    }

    pub fn sample_mean(&self) -> f64 {
        crate::stats::mean(&self.samples)
    }
}

/// Mean-square Johnson noise voltage of `resistance_ohms` under `spec`:
/// 4·k_B·T·R·B (or R in normalized units). Linear in R, T, and B.
pub fn johnson_variance(resistance_ohms: f64, spec: &NoiseSpec) -> Result<f64, NoiseError> {
    if resistance_ohms < 0.0 || resistance_ohms.is_nan() {
        return Err(NoiseError::NegativeResistance {
            ohms: resistance_ohms,
        });
    }
    Ok(spec.thermal_scale() * resistance_ohms)
}

/// Draws `count` independent zero-mean Gaussian samples with the given
/// variance from an already-seeded generator.
pub(crate) fn gaussian_samples(variance: f64, count: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let sigma = variance.sqrt();
    (0..count)
        .map(|_| sigma * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Synthesizes one thermal-noise trace: `spec.samples_per_bit` independent
/// Gaussian samples, zero mean, variance `johnson_variance(resistance, spec)`.
/// Bit-identical output for a fixed `(resistance, spec, seed)`.
pub fn generate_trace(
    resistance_ohms: f64,
    spec: &NoiseSpec,
    seed: u64,
) -> Result<NoiseTrace, NoiseError> {
    spec.validate()?;
    let variance = johnson_variance(resistance_ohms, spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(NoiseTrace {
        samples: gaussian_samples(variance, spec.samples_per_bit, &mut rng),
        dt: spec.dt(),
    })
}
