//! Bit-error statistics for variance-threshold decisions.
//!
//! The mean square of n independent zero-mean Gaussian samples with variance
//! sigma^2 is distributed as sigma^2/n times a chi-square with n degrees of
//! freedom. A detector that thresholds at the geometric mean of two candidate
//! levels therefore errs with probability
//!
//! ```text
//! BER(r, n) = 1/2 * [ P(chi2_n >= n*sqrt(r))  +  P(chi2_n < n/sqrt(r)) ]
//! ```
//!
//! where r > 1 is the ratio of the two levels — a quantity that depends only
//! on the ratio and decays exponentially in n. Both tails are evaluated in
//! log space, so the model stays meaningful at error rates far below
//! anything Monte Carlo could reach; Monte Carlo cross-validation at easier
//! operating points licenses the extrapolation.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::kljn::{party_decode, theoretical_levels, ResistorPair};
use crate::noise::NoiseSpec;
use crate::sim;
use crate::stats::{ln_add_exp, ln_chi_square_cdf, ln_chi_square_sf};
use crate::thermod::{calibrate, AmplifierModel, ChannelModel, ReceivePath};

#[derive(Debug, Error)]
pub enum ErrstatError {
    #[error("variance ratio must be > 1, got {0}")]
    DegenerateRatio(f64),
    #[error("target bit-error rate must lie in (0, 0.5], got {0}")]
    InvalidTarget(f64),
    #[error(transparent)]
    Kljn(#[from] crate::kljn::KljnError),
    #[error(transparent)]
    Thermod(#[from] crate::thermod::ThermodError),
}

/// One point of a BER-versus-samples curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BerCurvePoint {
    pub samples_per_bit: usize,
    pub ber_analytic: f64,
    pub ber_monte_carlo: Option<f64>,
    pub trials: usize,
}

/// Natural log of the analytic error probability of the geometric-mean
/// threshold between two variance levels with the given ratio, at `samples`
/// degrees of freedom, averaged over equiprobable hypotheses.
pub fn ln_analytic_ber(variance_ratio: f64, samples: usize) -> f64 {
    assert!(samples >= 1, "need at least one sample");
    if !(variance_ratio > 1.0) {
        return 0.5f64.ln();
    }
    let n = samples as f64;
    let theta = variance_ratio.sqrt();
    // Low hypothesis errs above the threshold, high hypothesis below it.
    let ln_err_low = ln_chi_square_sf(n * theta, n);
    let ln_err_high = ln_chi_square_cdf(n / theta, n);
    0.5f64.ln() + ln_add_exp(ln_err_low, ln_err_high)
}

/// Analytic error probability; see [`ln_analytic_ber`]. A ratio at or below 1
/// is degenerate (indistinguishable hypotheses) and yields 0.5.
pub fn analytic_ber(variance_ratio: f64, samples: usize) -> f64 {
    ln_analytic_ber(variance_ratio, samples).exp()
}

/// Smallest sample count whose analytic BER is at or below `target_ber`,
/// found by doubling then binary search (the analytic BER is monotone
/// non-increasing in the sample count).
pub fn required_samples(variance_ratio: f64, target_ber: f64) -> Result<usize, ErrstatError> {
    if !(variance_ratio > 1.0) || !variance_ratio.is_finite() {
        return Err(ErrstatError::DegenerateRatio(variance_ratio));
    }
    if !(target_ber > 0.0 && target_ber <= 0.5) {
        return Err(ErrstatError::InvalidTarget(target_ber));
    }
    let ln_target = target_ber.ln();
    if ln_analytic_ber(variance_ratio, 1) <= ln_target {
        return Ok(1);
    }
    let mut hi = 1usize;
    loop {
        hi = hi.checked_mul(2).expect("sample count overflow");
        if ln_analytic_ber(variance_ratio, hi) <= ln_target {
            break;
        }
    }
    let mut lo = hi / 2; // ber(lo) > target
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if ln_analytic_ber(variance_ratio, mid) <= ln_target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Natural log of the analytic probability that a KLJN bit exchange
/// misclassifies (and therefore miscodes or fails to decode), averaged over
/// uniform independent party choices: prior 1/4, 1/2, 1/4 over the LL, mixed,
/// and HH levels, with thresholds at the geometric means of adjacent levels.
pub fn ln_kljn_decode_error(pair: &ResistorPair, spec: &NoiseSpec, samples: usize) -> f64 {
    let [v_ll, v_mixed, v_hh] = theoretical_levels(pair, spec);
    let n = samples as f64;
    let t_low = (v_ll * v_mixed).sqrt();
    let t_high = (v_mixed * v_hh).sqrt();
    let ln_err_ll = ln_chi_square_sf(n * t_low / v_ll, n);
    let ln_err_mixed = ln_add_exp(
        ln_chi_square_cdf(n * t_low / v_mixed, n),
        ln_chi_square_sf(n * t_high / v_mixed, n),
    );
    let ln_err_hh = ln_chi_square_cdf(n * t_high / v_hh, n);
    ln_add_exp(
        0.25f64.ln() + ln_add_exp(ln_err_ll, ln_err_hh),
        0.5f64.ln() + ln_err_mixed,
    )
}

/// See [`ln_kljn_decode_error`].
pub fn kljn_decode_error(pair: &ResistorPair, spec: &NoiseSpec, samples: usize) -> f64 {
    ln_kljn_decode_error(pair, spec, samples).exp()
}

/// Which simulated system a Monte Carlo BER run exercises.
#[derive(Debug, Clone)]
pub enum SystemUnderTest {
    Kljn {
        pair: ResistorPair,
    },
    Thermod {
        pair: ResistorPair,
        amp: AmplifierModel,
        ch: ChannelModel,
    },
}

impl SystemUnderTest {
    /// The variance contrast the legitimate detector operates at: the
    /// calibrated level ratio for TherMod, and the smaller (error-dominating)
    /// adjacent-level ratio for the three-level KLJN classifier.
    pub fn effective_variance_ratio(&self, spec: &NoiseSpec) -> f64 {
        match self {
            SystemUnderTest::Kljn { pair } => {
                let [v_ll, v_mixed, v_hh] = theoretical_levels(pair, spec);
                (v_mixed / v_ll).min(v_hh / v_mixed)
            }
            SystemUnderTest::Thermod { pair, amp, ch } => {
                calibrate(pair, spec, amp, ch, ReceivePath::Receiver).variance_ratio()
            }
        }
    }

    /// Analytic legitimate-party error probability at `samples` per bit.
    pub fn analytic_ber(&self, spec: &NoiseSpec, samples: usize) -> f64 {
        match self {
            SystemUnderTest::Kljn { pair } => kljn_decode_error(pair, spec, samples),
            SystemUnderTest::Thermod { pair, amp, ch } => {
                let cal = calibrate(pair, spec, amp, ch, ReceivePath::Receiver);
                analytic_ber(cal.variance_ratio(), samples)
            }
        }
    }
}

/// Empirical legitimate-party bit-error rate over `trials` independent
/// exchanges at `samples` samples per bit, paired with the analytic value.
/// Deterministic per seed; trials run in parallel with per-index seeds.
pub fn monte_carlo_ber(
    system: &SystemUnderTest,
    spec: &NoiseSpec,
    samples: usize,
    trials: usize,
    seed: u64,
) -> Result<BerCurvePoint, ErrstatError> {
    assert!(trials >= 1, "need at least one trial");
    let spec = spec.clone().with_samples_per_bit(samples);
    let errors = match system {
        SystemUnderTest::Kljn { pair } => (0..trials as u64)
            .into_par_iter()
            .map(|i| {
                let trial = sim::kljn_trial(pair, &spec, seed, i)?;
                // Alice decodes Bob; a failed decode counts as an error.
                let decoded = party_decode(trial.state.alice, trial.level);
                Ok(u64::from(decoded.ok() != Some(trial.state.bob)))
            })
            .sum::<Result<u64, crate::kljn::KljnError>>()?,
        SystemUnderTest::Thermod { pair, amp, ch } => {
            let cal_rx = calibrate(pair, &spec, amp, ch, ReceivePath::Receiver);
            let cal_eve = calibrate(pair, &spec, amp, ch, ReceivePath::Eavesdropper);
            (0..trials as u64)
                .into_par_iter()
                .map(|i| {
                    let trial =
                        sim::thermod_trial(pair, &spec, amp, ch, &cal_rx, &cal_eve, seed, i)?;
                    Ok(u64::from(trial.rx.bit != trial.tx_bit))
                })
                .sum::<Result<u64, crate::thermod::ThermodError>>()?
        }
    };
    Ok(BerCurvePoint {
        samples_per_bit: samples,
        ber_analytic: system.analytic_ber(&spec, samples),
        ber_monte_carlo: Some(errors as f64 / trials as f64),
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn degenerate_ratio_returns_half() {
        assert_eq!(analytic_ber(1.0, 10), 0.5);
        assert_eq!(analytic_ber(0.3, 10), 0.5);
        // Just above 1 the detector is barely better than a coin.
        let near = analytic_ber(1.0 + 1e-9, 50);
        assert!((near - 0.5).abs() < 1e-6, "ber = {near}");
    }

    #[test]
    fn more_samples_means_fewer_errors() {
        assert!(analytic_ber(10.0, 100) < analytic_ber(10.0, 10));
        let mut prev = f64::INFINITY;
        for n in [1usize, 2, 5, 10, 20, 50, 100, 200, 400] {
            let ber = analytic_ber(10.0, n);
            assert!(ber < prev, "ber({n}) = {ber} did not decrease");
            prev = ber;
        }
    }

    // At n = 2 the chi-square is exponential and the BER has the closed form
    // (e^{-sqrt(r)} + 1 - e^{-1/sqrt(r)}) / 2, an oracle independent of the
    // incomplete-gamma evaluation.
    #[test]
    fn matches_two_sample_closed_form() {
        for &r in &[1.5f64, 3.0, 10.0, 100.0] {
            let theta = r.sqrt();
            let expected = 0.5 * ((-theta).exp() + 1.0 - (-1.0 / theta).exp());
            assert_relative_eq!(analytic_ber(r, 2), expected, max_relative = 1e-10);
        }
    }

    // n = 4: chi2_4 survival is e^{-y}(1+y).
    #[test]
    fn matches_four_sample_closed_form() {
        for &r in &[2.0f64, 10.0] {
            let theta = r.sqrt();
            let err_low = (-2.0 * theta).exp() * (1.0 + 2.0 * theta);
            let err_high = 1.0 - (-2.0 / theta).exp() * (1.0 + 2.0 / theta);
            assert_relative_eq!(
                analytic_ber(r, 4),
                0.5 * (err_low + err_high),
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn log_ber_is_almost_affine_in_samples() {
        let ns = [50.0f64, 100.0, 200.0, 400.0];
        let lns: Vec<f64> = ns.iter().map(|&n| ln_analytic_ber(10.0, n as usize)).collect();
        let fit = crate::stats::linear_fit(&ns, &lns);
        assert!(fit.r_squared > 0.99, "r^2 = {}", fit.r_squared);
        assert!(fit.slope < 0.0);
    }

    #[test]
    fn required_samples_examples() {
        // Any single sample already beats a coin flip.
        assert_eq!(required_samples(10.0, 0.5).unwrap(), 1);
        let n3 = required_samples(10.0, 1e-3).unwrap();
        let n6 = required_samples(10.0, 1e-6).unwrap();
        assert!(n6 >= n3);
        // Self-consistency of the search.
        assert!(analytic_ber(10.0, n6) <= 1e-6);
        assert!(analytic_ber(10.0, n6 - 1) > 1e-6);
        assert!(analytic_ber(10.0, n3) <= 1e-3);
        assert!(analytic_ber(10.0, n3 - 1) > 1e-3);
    }

    #[test]
    fn required_samples_rejects_bad_inputs() {
        assert!(matches!(
            required_samples(1.0, 1e-3),
            Err(ErrstatError::DegenerateRatio(_))
        ));
        assert!(matches!(
            required_samples(10.0, 0.0),
            Err(ErrstatError::InvalidTarget(_))
        ));
        assert!(matches!(
            required_samples(10.0, 0.7),
            Err(ErrstatError::InvalidTarget(_))
        ));
    }

    #[test]
    fn near_chance_point_is_near_chance() {
        let system = SystemUnderTest::Thermod {
            pair: ResistorPair::new(1e3, 1.01e3).unwrap(),
            amp: AmplifierModel::ideal(),
            ch: ChannelModel::identity(),
        };
        let spec = NoiseSpec::default_with_samples(2);
        let point = monte_carlo_ber(&system, &spec, 2, 20_000, 77).unwrap();
        let mc = point.ber_monte_carlo.unwrap();
        assert!((mc - 0.5).abs() < 0.02, "ber = {mc}");
    }

    #[test]
    fn monte_carlo_tracks_the_analytic_model() {
        // A cheap operating point with BER around 1e-2.
        let system = SystemUnderTest::Thermod {
            pair: ResistorPair::default_lab(),
            amp: AmplifierModel::ideal(),
            ch: ChannelModel::identity(),
        };
        let spec = NoiseSpec::default_with_samples(12);
        let trials = 200_000;
        let point = monte_carlo_ber(&system, &spec, 12, trials, 1234).unwrap();
        let analytic = point.ber_analytic;
        let mc = point.ber_monte_carlo.unwrap();
        let sigma = (analytic * (1.0 - analytic) / trials as f64).sqrt();
        assert!(
            (mc - analytic).abs() < 3.0 * sigma,
            "mc {mc} vs analytic {analytic} (sigma {sigma})"
        );
    }

    #[test]
    fn monte_carlo_is_deterministic_per_seed() {
        let system = SystemUnderTest::Kljn {
            pair: ResistorPair::default_lab(),
        };
        let spec = NoiseSpec::default_with_samples(100);
        let a = monte_carlo_ber(&system, &spec, 100, 2_000, 5).unwrap();
        let b = monte_carlo_ber(&system, &spec, 100, 2_000, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn kljn_effective_ratio_is_the_smaller_adjacent_gap() {
        let system = SystemUnderTest::Kljn {
            pair: ResistorPair::default_lab(),
        };
        let spec = NoiseSpec::default_with_samples(2);
        // Levels 500, 909.09.., 5000: adjacent ratios 20/11 and 5.5.
        assert_relative_eq!(
            system.effective_variance_ratio(&spec),
            20.0 / 11.0,
            max_relative = 1e-12
        );
    }
}
