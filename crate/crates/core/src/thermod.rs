//! The TherMod wireless chain: a single transmitter that modulates
//! thermal-noise variance by resistor state, an amplifier, a broadcast channel
//! with optional delay taps, and variance-threshold receivers.
//!
//! Unlike the wired loop there is no Kirchhoff ambiguity here — the receiver
//! and any eavesdropper face the same two-hypothesis variance test, which is
//! exactly why the scheme inherits none of KLJN's security.
//!
//! Chain per bit: source -> amplifier (gain with optional per-bit ripple,
//! plus additive amplifier noise) -> delay taps -> path gain -> additive
//! environment noise, independently for the receiver and the eavesdropper.
//! Tap echoes are fed from genuine past source samples (the trace is the
//! steady-state segment), so every emitted sample carries the full tap energy
//! 1 + sum(a_i^2).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kljn::ResistorPair;
use crate::noise::{gaussian_samples, johnson_variance, NoiseError, NoiseSpec, NoiseTrace};

#[derive(Debug, Error)]
pub enum ThermodError {
    #[error("invalid amplifier model: {field}: {message}")]
    InvalidAmplifier {
        field: &'static str,
        message: String,
    },
    #[error("invalid channel model: {field}: {message}")]
    InvalidChannel {
        field: &'static str,
        message: String,
    },
    #[error("calibration requires high > low > 0, got low = {low}, high = {high}")]
    InvalidCalibration { low: f64, high: f64 },
    #[error("cannot decide on an empty trace")]
    EmptyTrace,
    #[error(transparent)]
    Noise(#[from] NoiseError),
}

/// Amplifier between the noise source and the antenna.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplifierModel {
    /// Linear voltage gain.
    pub gain: f64,
    /// Variance of noise the amplifier adds at its output (V^2).
    #[serde(default)]
    pub added_noise_variance: f64,
    /// Per-bit gain artifact: the effective gain is gain * (1 +/- ripple),
    /// with the sign drawn once per bit.
    #[serde(default)]
    pub artifact_gain_ripple: f64,
    /// Electrical power the amplifier draws while transmitting (W).
    #[serde(default)]
    pub power_draw_watts: f64,
}

impl AmplifierModel {
    pub fn new(
        gain: f64,
        added_noise_variance: f64,
        artifact_gain_ripple: f64,
        power_draw_watts: f64,
    ) -> Result<Self, ThermodError> {
        let amp = Self {
            gain,
            added_noise_variance,
            artifact_gain_ripple,
            power_draw_watts,
        };
        amp.validate()?;
        Ok(amp)
    }

    /// Unit gain, no added noise, no ripple, no power draw.
    pub fn ideal() -> Self {
        Self {
            gain: 1.0,
            added_noise_variance: 0.0,
            artifact_gain_ripple: 0.0,
            power_draw_watts: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), ThermodError> {
        if !(self.gain > 0.0) {
            return Err(ThermodError::InvalidAmplifier {
                field: "gain",
                message: format!("must be > 0, got {}", self.gain),
            });
        }
        if !(self.added_noise_variance >= 0.0) {
            return Err(ThermodError::InvalidAmplifier {
                field: "added_noise_variance",
                message: format!("must be >= 0, got {}", self.added_noise_variance),
            });
        }
        if !(0.0..1.0).contains(&self.artifact_gain_ripple) {
            return Err(ThermodError::InvalidAmplifier {
                field: "artifact_gain_ripple",
                message: format!("must be in [0, 1), got {}", self.artifact_gain_ripple),
            });
        }
        if !(self.power_draw_watts >= 0.0) {
            return Err(ThermodError::InvalidAmplifier {
                field: "power_draw_watts",
                message: format!("must be >= 0, got {}", self.power_draw_watts),
            });
        }
        Ok(())
    }
}

/// One multipath echo: a delayed, scaled copy of the transmitted signal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayTap {
    pub delay_samples: usize,
    pub amplitude: f64,
}

/// Static wireless path to the receiver and to the eavesdropper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelModel {
    pub gain_to_receiver: f64,
    pub gain_to_eavesdropper: f64,
    /// Variance of additive environment noise at each observer (V^2), drawn
    /// independently for receiver and eavesdropper.
    #[serde(default)]
    pub environment_noise_variance: f64,
    #[serde(default)]
    pub delay_taps: Vec<DelayTap>,
}

impl ChannelModel {
    /// Both paths at unit gain, no environment noise, no multipath.
    pub fn identity() -> Self {
        Self {
            gain_to_receiver: 1.0,
            gain_to_eavesdropper: 1.0,
            environment_noise_variance: 0.0,
            delay_taps: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), ThermodError> {
        if !(self.gain_to_receiver >= 0.0) {
            return Err(ThermodError::InvalidChannel {
                field: "gain_to_receiver",
                message: format!("must be >= 0, got {}", self.gain_to_receiver),
            });
        }
        if !(self.gain_to_eavesdropper >= 0.0) {
            return Err(ThermodError::InvalidChannel {
                field: "gain_to_eavesdropper",
                message: format!("must be >= 0, got {}", self.gain_to_eavesdropper),
            });
        }
        if !(self.environment_noise_variance >= 0.0) {
            return Err(ThermodError::InvalidChannel {
                field: "environment_noise_variance",
                message: format!("must be >= 0, got {}", self.environment_noise_variance),
            });
        }
        for (i, tap) in self.delay_taps.iter().enumerate() {
            if tap.delay_samples < 1 {
                return Err(ThermodError::InvalidChannel {
                    field: "delay_taps",
                    message: format!("tap {i}: delay must be >= 1 sample"),
                });
            }
            if !tap.amplitude.is_finite() {
                return Err(ThermodError::InvalidChannel {
                    field: "delay_taps",
                    message: format!("tap {i}: amplitude must be finite"),
                });
            }
        }
        Ok(())
    }

    pub fn path_gain(&self, path: ReceivePath) -> f64 {
        match path {
            ReceivePath::Receiver => self.gain_to_receiver,
            ReceivePath::Eavesdropper => self.gain_to_eavesdropper,
        }
    }

    /// Energy of the channel impulse response: direct path plus echoes.
    pub fn tap_energy(&self) -> f64 {
        1.0 + self.delay_taps.iter().map(|t| t.amplitude * t.amplitude).sum::<f64>()
    }

    fn max_delay(&self) -> usize {
        self.delay_taps.iter().map(|t| t.delay_samples).max().unwrap_or(0)
    }
}

/// Which observer a calibration or decision is for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReceivePath {
    Receiver,
    Eavesdropper,
}

/// The two expected received mean-square levels an observer thresholds
/// between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationTable {
    pub expected_rx_variance_low: f64,
    pub expected_rx_variance_high: f64,
}

impl CalibrationTable {
    /// Manual construction; requires high > low > 0. [`calibrate`] may return
    /// degenerate tables (equal levels) for channels that deliver no signal,
    /// which makes decisions chance-level rather than an error.
    pub fn new(
        expected_rx_variance_low: f64,
        expected_rx_variance_high: f64,
    ) -> Result<Self, ThermodError> {
        if !(expected_rx_variance_high > expected_rx_variance_low
            && expected_rx_variance_low > 0.0)
        {
            return Err(ThermodError::InvalidCalibration {
                low: expected_rx_variance_low,
                high: expected_rx_variance_high,
            });
        }
        Ok(Self {
            expected_rx_variance_low,
            expected_rx_variance_high,
        })
    }

    /// Decision threshold: geometric mean of the two levels.
    pub fn threshold(&self) -> f64 {
        (self.expected_rx_variance_low * self.expected_rx_variance_high).sqrt()
    }

    /// Ratio of the two calibrated levels (the effective detector contrast).
    pub fn variance_ratio(&self) -> f64 {
        self.expected_rx_variance_high / self.expected_rx_variance_low
    }
}

/// One variance-threshold decision.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Decision {
    /// Decoded bit; true = 1 = high resistor.
    pub bit: bool,
    /// |ln(sample variance) - ln(threshold)|.
    pub log_likelihood_margin: f64,
}

/// Transmits one bit: returns the traces observed at the receiver and at the
/// eavesdropper. Both observe the same amplified, tap-filtered signal scaled
/// by their own path gain plus their own independent environment noise —
/// the broadcast property of the wireless medium.
///
/// Deterministic for a fixed seed; per-bit randomness is drawn in a fixed
/// order (source seed, ripple sign, amplifier noise, receiver noise,
/// eavesdropper noise).
pub fn transmit_bit(
    bit: bool,
    pair: &ResistorPair,
    spec: &NoiseSpec,
    amp: &AmplifierModel,
    ch: &ChannelModel,
    seed: u64,
) -> Result<(NoiseTrace, NoiseTrace), ThermodError> {
    pair.validate().map_err(|e| ThermodError::InvalidChannel {
        field: "pair",
        message: e.to_string(),
    })?;
    spec.validate()?;
    amp.validate()?;
    ch.validate()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let source_seed: u64 = rng.random();
    let ripple_up: bool = rng.random();

    let resistance = if bit { pair.r_high_ohms } else { pair.r_low_ohms };
    let source_variance = johnson_variance(resistance, spec)?;

    let n = spec.samples_per_bit;
    let d_max = ch.max_delay();
    let mut source_rng = ChaCha8Rng::seed_from_u64(source_seed);
    // Extra leading samples feed the tap echoes so the emitted segment is in
    // steady state.
    let mut signal = gaussian_samples(source_variance, n + d_max, &mut source_rng);

    let sign = if ripple_up { 1.0 } else { -1.0 };
    let effective_gain = amp.gain * (1.0 + sign * amp.artifact_gain_ripple);
    for s in &mut signal {
        *s *= effective_gain;
    }
    if amp.added_noise_variance > 0.0 {
        let noise = gaussian_samples(amp.added_noise_variance, signal.len(), &mut rng);
        for (s, w) in signal.iter_mut().zip(noise) {
            *s += w;
        }
    } else {
        // Keep the draw order identical whether or not amplifier noise is
        // enabled, so toggling it never reshuffles downstream randomness.
        let _ = rng.random::<u64>();
    }

    let mut propagated = Vec::with_capacity(n);
    for t in d_max..(n + d_max) {
        let mut v = signal[t];
        for tap in &ch.delay_taps {
            v += tap.amplitude * signal[t - tap.delay_samples];
        }
        propagated.push(v);
    }

    let observe = |gain: f64, rng: &mut ChaCha8Rng| -> NoiseTrace {
        let env = gaussian_samples(ch.environment_noise_variance, n, rng);
        let samples = propagated
            .iter()
            .zip(env)
            .map(|(s, w)| gain * s + w)
            .collect();
        NoiseTrace {
            samples,
            dt: spec.dt(),
        }
    };
    let rx = observe(ch.gain_to_receiver, &mut rng);
    let eve = observe(ch.gain_to_eavesdropper, &mut rng);
    Ok((rx, eve))
}

/// Analytic expected received mean-square levels for bit 0 and bit 1 on the
/// given path, accounting for amplifier gain (including the ripple's second
/// moment), amplifier noise, tap energy, path gain, and environment noise.
pub fn calibrate(
    pair: &ResistorPair,
    spec: &NoiseSpec,
    amp: &AmplifierModel,
    ch: &ChannelModel,
    path: ReceivePath,
) -> CalibrationTable {
    let gain_sq = amp.gain * amp.gain
        * (1.0 + amp.artifact_gain_ripple * amp.artifact_gain_ripple);
    let path_gain_sq = ch.path_gain(path).powi(2);
    let tap_energy = ch.tap_energy();
    let level = |resistance: f64| {
        let src = spec.thermal_scale() * resistance;
        (gain_sq * src + amp.added_noise_variance) * tap_energy * path_gain_sq
            + ch.environment_noise_variance
    };
    CalibrationTable {
        expected_rx_variance_low: level(pair.r_low_ohms),
        expected_rx_variance_high: level(pair.r_high_ohms),
    }
}

/// Decides a bit from the sample variance of a received trace: 1 iff the
/// mean square is at or above the geometric mean of the two calibrated
/// levels (exact ties decide 1).
pub fn variance_threshold_decide(
    trace: &NoiseTrace,
    cal: &CalibrationTable,
) -> Result<Decision, ThermodError> {
    if trace.is_empty() {
        return Err(ThermodError::EmptyTrace);
    }
    let measured = trace.mean_square();
    let threshold = cal.threshold();
    let bit = measured >= threshold;
    let log_likelihood_margin = if threshold > 0.0 && measured > 0.0 {
        (measured.ln() - threshold.ln()).abs()
    } else {
        f64::INFINITY
    };
    Ok(Decision {
        bit,
        log_likelihood_margin,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeds::derive_seed;
    use approx::assert_relative_eq;

    fn lab(samples: usize) -> (ResistorPair, NoiseSpec) {
        (ResistorPair::default_lab(), NoiseSpec::default_with_samples(samples))
    }

    #[test]
    fn identity_channel_preserves_source_variance() {
        let (pair, spec) = lab(200_000);
        let (rx, _) = transmit_bit(
            true,
            &pair,
            &spec,
            &AmplifierModel::ideal(),
            &ChannelModel::identity(),
            42,
        )
        .unwrap();
        let expected = johnson_variance(pair.r_high_ohms, &spec).unwrap();
        assert_relative_eq!(rx.mean_square(), expected, max_relative = 0.02);
    }

    #[test]
    fn equal_paths_see_the_same_broadcast_signal() {
        let (pair, spec) = lab(1_000);
        let (rx, eve) = transmit_bit(
            false,
            &pair,
            &spec,
            &AmplifierModel::ideal(),
            &ChannelModel::identity(),
            7,
        )
        .unwrap();
        // No environment noise: the broadcast traces are identical.
        assert_eq!(rx, eve);
    }

    #[test]
    fn high_bit_variance_scales_by_alpha() {
        let (pair, spec) = lab(100_000);
        let amp = AmplifierModel::ideal();
        let ch = ChannelModel::identity();
        let (rx0, _) = transmit_bit(false, &pair, &spec, &amp, &ch, 100).unwrap();
        let (rx1, _) = transmit_bit(true, &pair, &spec, &amp, &ch, 101).unwrap();
        assert_relative_eq!(
            rx1.mean_square() / rx0.mean_square(),
            pair.alpha(),
            max_relative = 0.05
        );
    }

    #[test]
    fn calibration_identity_channel_equals_amplified_source() {
        let (pair, spec) = lab(100);
        let mut amp = AmplifierModel::ideal();
        amp.gain = 3.0;
        let cal = calibrate(&pair, &spec, &amp, &ChannelModel::identity(), ReceivePath::Receiver);
        let low = 9.0 * johnson_variance(pair.r_low_ohms, &spec).unwrap();
        let high = 9.0 * johnson_variance(pair.r_high_ohms, &spec).unwrap();
        assert_relative_eq!(cal.expected_rx_variance_low, low, max_relative = 1e-12);
        assert_relative_eq!(cal.expected_rx_variance_high, high, max_relative = 1e-12);
    }

    #[test]
    fn environment_noise_shifts_both_levels_additively() {
        let (pair, spec) = lab(100);
        let amp = AmplifierModel::ideal();
        let mut ch = ChannelModel::identity();
        let base = calibrate(&pair, &spec, &amp, &ch, ReceivePath::Receiver);
        ch.environment_noise_variance = 3.5e-13;
        let shifted = calibrate(&pair, &spec, &amp, &ch, ReceivePath::Receiver);
        assert_relative_eq!(
            shifted.expected_rx_variance_low - base.expected_rx_variance_low,
            3.5e-13,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            shifted.expected_rx_variance_high - base.expected_rx_variance_high,
            3.5e-13,
            max_relative = 1e-12
        );
    }

    #[test]
    fn one_tap_scales_both_levels_by_one_plus_a_squared() {
        let (pair, spec) = lab(100);
        let amp = AmplifierModel::ideal();
        let mut ch = ChannelModel::identity();
        let base = calibrate(&pair, &spec, &amp, &ch, ReceivePath::Receiver);
        ch.delay_taps.push(DelayTap {
            delay_samples: 3,
            amplitude: 0.5,
        });
        let tapped = calibrate(&pair, &spec, &amp, &ch, ReceivePath::Receiver);
        assert_relative_eq!(
            tapped.expected_rx_variance_low,
            1.25 * base.expected_rx_variance_low,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            tapped.expected_rx_variance_high,
            1.25 * base.expected_rx_variance_high,
            max_relative = 1e-12
        );
    }

    #[test]
    fn tapped_transmission_matches_tapped_calibration() {
        let (pair, spec) = lab(300_000);
        let amp = AmplifierModel::ideal();
        let mut ch = ChannelModel::identity();
        ch.delay_taps.push(DelayTap {
            delay_samples: 5,
            amplitude: 0.7,
        });
        let cal = calibrate(&pair, &spec, &amp, &ch, ReceivePath::Receiver);
        let (rx, _) = transmit_bit(true, &pair, &spec, &amp, &ch, 11).unwrap();
        assert_relative_eq!(
            rx.mean_square(),
            cal.expected_rx_variance_high,
            max_relative = 0.02
        );
    }

    #[test]
    fn decide_at_exact_levels_and_threshold() {
        // Levels 1 and 16 give an exactly representable threshold of 4.
        let cal = CalibrationTable::new(1.0, 16.0).unwrap();
        assert_eq!(cal.threshold(), 4.0);
        let mk = |sample: f64| NoiseTrace {
            samples: vec![sample; 4],
            dt: 1.0,
        };
        assert!(variance_threshold_decide(&mk(4.0), &cal).unwrap().bit);
        assert!(!variance_threshold_decide(&mk(1.0), &cal).unwrap().bit);
        // Exactly at the geometric-mean threshold: ties decide 1.
        let tie = variance_threshold_decide(&mk(2.0), &cal).unwrap();
        assert!(tie.bit);
        assert!(tie.log_likelihood_margin < 1e-12);
    }

    #[test]
    fn empty_trace_is_an_error() {
        let cal = CalibrationTable::new(1.0, 2.0).unwrap();
        let empty = NoiseTrace {
            samples: vec![],
            dt: 1.0,
        };
        assert!(matches!(
            variance_threshold_decide(&empty, &cal),
            Err(ThermodError::EmptyTrace)
        ));
    }

    #[test]
    fn calibration_table_invariant() {
        assert!(CalibrationTable::new(1.0, 2.0).is_ok());
        assert!(CalibrationTable::new(2.0, 1.0).is_err());
        assert!(CalibrationTable::new(0.0, 1.0).is_err());
    }

    #[test]
    fn receiver_ber_is_small_at_alpha_ten_and_hundred_samples() {
        let (pair, spec) = lab(100);
        let amp = AmplifierModel::ideal();
        let ch = ChannelModel::identity();
        let cal = calibrate(&pair, &spec, &amp, &ch, ReceivePath::Receiver);
        let trials = 100_000u64;
        let errors: u64 = (0..trials)
            .filter(|&i| {
                let bit = i % 2 == 0;
                let seed = derive_seed(2024, "thermod-test/ber", i);
                let (rx, _) = transmit_bit(bit, &pair, &spec, &amp, &ch, seed).unwrap();
                variance_threshold_decide(&rx, &cal).unwrap().bit != bit
            })
            .count() as u64;
        let ber = errors as f64 / trials as f64;
        assert!(ber < 1e-3, "ber = {ber}");
    }

    #[test]
    fn ber_is_monotone_in_samples_and_alpha() {
        // Receiver BER is non-increasing in samples per bit and in alpha,
        // with 2-sigma Monte Carlo slack.
        let amp = AmplifierModel::ideal();
        let ch = ChannelModel::identity();
        let trials = 100_000u64;
        let ber_at = |pair: &ResistorPair, samples: usize, tag: &str| -> f64 {
            let spec = NoiseSpec::default_with_samples(samples);
            let cal = calibrate(pair, &spec, &amp, &ch, ReceivePath::Receiver);
            let errors = (0..trials)
                .filter(|&i| {
                    let bit = i % 2 == 0;
                    let seed = derive_seed(31337, tag, i);
                    let (rx, _) = transmit_bit(bit, pair, &spec, &amp, &ch, seed).unwrap();
                    variance_threshold_decide(&rx, &cal).unwrap().bit != bit
                })
                .count();
            errors as f64 / trials as f64
        };
        let sigma = |p: f64| (p.max(1e-9) * (1.0 - p) / trials as f64).sqrt();

        let pair = ResistorPair::default_lab();
        let mut prev = f64::INFINITY;
        for &n in &[10usize, 30, 100, 300, 1000] {
            let ber = ber_at(&pair, n, "mono-n");
            assert!(
                ber <= prev + 2.0 * (sigma(ber) + sigma(prev.min(1.0))),
                "ber({n}) = {ber} exceeded previous {prev}"
            );
            prev = ber;
        }

        let mut prev = f64::INFINITY;
        for &alpha in &[1.5f64, 3.0, 10.0] {
            let pair = ResistorPair::new(1e3, alpha * 1e3).unwrap();
            let ber = ber_at(&pair, 30, "mono-alpha");
            assert!(
                ber <= prev + 2.0 * (sigma(ber) + sigma(prev.min(1.0))),
                "ber(alpha={alpha}) = {ber} exceeded previous {prev}"
            );
            prev = ber;
        }
    }

    #[test]
    fn eve_matches_receiver_when_paths_are_statistically_identical() {
        // Same path gain, same (independent) environment noise level: Eve's
        // error rate equals the receiver's within Monte Carlo error.
        let (pair, spec) = lab(50);
        let amp = AmplifierModel::ideal();
        let mut ch = ChannelModel::identity();
        ch.environment_noise_variance = johnson_variance(pair.r_low_ohms, &spec).unwrap();
        let cal_rx = calibrate(&pair, &spec, &amp, &ch, ReceivePath::Receiver);
        let cal_eve = calibrate(&pair, &spec, &amp, &ch, ReceivePath::Eavesdropper);
        let trials = 200_000u64;
        let mut rx_err = 0u64;
        let mut eve_err = 0u64;
        for i in 0..trials {
            let bit = i % 2 == 0;
            let seed = derive_seed(5150, "thermod-test/parity", i);
            let (rx, eve) = transmit_bit(bit, &pair, &spec, &amp, &ch, seed).unwrap();
            if variance_threshold_decide(&rx, &cal_rx).unwrap().bit != bit {
                rx_err += 1;
            }
            if variance_threshold_decide(&eve, &cal_eve).unwrap().bit != bit {
                eve_err += 1;
            }
        }
        let (p_rx, p_eve) = (rx_err as f64 / trials as f64, eve_err as f64 / trials as f64);
        let sigma = (p_rx * (1.0 - p_rx) / trials as f64
            + p_eve * (1.0 - p_eve) / trials as f64)
            .sqrt();
        assert!(
            (p_rx - p_eve).abs() < 4.0 * sigma,
            "receiver {p_rx} vs eavesdropper {p_eve} (sigma {sigma})"
        );
        assert!(p_rx > 0.0, "noise level should produce some errors at N=50");
    }

    #[test]
    fn environment_noise_degrades_the_analytic_contrast() {
        let (pair, spec) = lab(100);
        let amp = AmplifierModel::ideal();
        let mut ch = ChannelModel::identity();
        let clean = calibrate(&pair, &spec, &amp, &ch, ReceivePath::Receiver);
        ch.environment_noise_variance = 10.0 * clean.expected_rx_variance_low;
        let noisy = calibrate(&pair, &spec, &amp, &ch, ReceivePath::Receiver);
        assert!(noisy.variance_ratio() < clean.variance_ratio());
        // Smaller contrast means strictly larger analytic error probability.
        let ber_clean = crate::errstat::analytic_ber(clean.variance_ratio(), 100);
        let ber_noisy = crate::errstat::analytic_ber(noisy.variance_ratio(), 100);
        assert!(ber_noisy > ber_clean);
    }

    #[test]
    fn ripple_second_moment_enters_calibration() {
        let (pair, spec) = lab(100);
        let mut amp = AmplifierModel::ideal();
        let base = calibrate(&pair, &spec, &amp, &ChannelModel::identity(), ReceivePath::Receiver);
        amp.artifact_gain_ripple = 0.3;
        let rippled =
            calibrate(&pair, &spec, &amp, &ChannelModel::identity(), ReceivePath::Receiver);
        assert_relative_eq!(
            rippled.expected_rx_variance_high,
            1.09 * base.expected_rx_variance_high,
            max_relative = 1e-12
        );
    }
}
