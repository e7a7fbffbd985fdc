//! Shared statistical machinery: log-space incomplete-gamma tails (for
//! chi-square error probabilities far below floating-point underflow),
//! sample moments, a two-sample location test, correlation, and least squares.
//!
//! Everything here is pure arithmetic; the chi-square helpers are the basis of
//! the analytic bit-error model in [`crate::errstat`].

use std::f64::consts::PI;

/// Lanczos coefficients, g = 7, n = 9, as published.
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> f64 {
    assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// ln(1 - e^l) for l <= 0, stable near both ends.
fn ln_one_minus_exp(l: f64) -> f64 {
    debug_assert!(l <= 0.0);
    if l > -std::f64::consts::LN_2 {
        (-l.exp_m1()).ln()
    } else {
        (-l.exp()).ln_1p()
    }
}

/// ln(e^a + e^b) without overflow.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// ln P(a, x), lower tail by series; requires x < a + 1.
fn ln_lower_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut ap = a;
    for _ in 0..100_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    a * x.ln() - x - ln_gamma(a + 1.0) + sum.ln()
}

/// ln Q(a, x), upper tail by continued fraction (modified Lentz);
/// requires x >= a + 1.
fn ln_upper_cf(a: f64, x: f64) -> f64 {
    const FPMIN: f64 = f64::MIN_POSITIVE / f64::EPSILON;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..100_000u64 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 3e-16 {
            break;
        }
    }
    a * x.ln() - x - ln_gamma(a) + h.ln()
}

/// ln of the regularized lower incomplete gamma P(a, x).
///
/// The tail that is small is always evaluated directly in log space, so
/// results remain meaningful far below `f64::MIN_POSITIVE`.
pub fn ln_gamma_lower_regularized(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "invalid arguments a={a}, x={x}");
    if x == 0.0 {
        return f64::NEG_INFINITY;
    }
    if x < a + 1.0 {
        ln_lower_series(a, x)
    } else {
        ln_one_minus_exp(ln_upper_cf(a, x))
    }
}

/// ln of the regularized upper incomplete gamma Q(a, x).
pub fn ln_gamma_upper_regularized(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "invalid arguments a={a}, x={x}");
    if x == 0.0 {
        return 0.0;
    }
    if x >= a + 1.0 {
        ln_upper_cf(a, x)
    } else {
        ln_one_minus_exp(ln_lower_series(a, x))
    }
}

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_lower_regularized(a: f64, x: f64) -> f64 {
    ln_gamma_lower_regularized(a, x).exp()
}

/// Regularized upper incomplete gamma Q(a, x).
pub fn gamma_upper_regularized(a: f64, x: f64) -> f64 {
    ln_gamma_upper_regularized(a, x).exp()
}

/// ln of the chi-square CDF with `dof` degrees of freedom.
pub fn ln_chi_square_cdf(x: f64, dof: f64) -> f64 {
    ln_gamma_lower_regularized(dof / 2.0, x / 2.0)
}

/// ln of the chi-square survival function (upper tail).
pub fn ln_chi_square_sf(x: f64, dof: f64) -> f64 {
    ln_gamma_upper_regularized(dof / 2.0, x / 2.0)
}

/// Chi-square CDF.
pub fn chi_square_cdf(x: f64, dof: f64) -> f64 {
    ln_chi_square_cdf(x, dof).exp()
}

/// Chi-square survival function.
pub fn chi_square_sf(x: f64, dof: f64) -> f64 {
    ln_chi_square_sf(x, dof).exp()
}

/// Arithmetic mean. Empty input yields NaN.
pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (divisor n - 1).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Mean of squares (the mean-square statistic used throughout the protocol).
pub fn mean_square(xs: &[f64]) -> f64 {
    xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64
}

/// Welch two-sample z statistic for equality of means.
pub fn two_sample_z(a: &[f64], b: &[f64]) -> f64 {
    let (ma, mb) = (mean(a), mean(b));
    let (va, vb) = (sample_variance(a), sample_variance(b));
    (ma - mb) / (va / a.len() as f64 + vb / b.len() as f64).sqrt()
}

/// Pearson correlation coefficient of two equal-length samples.
pub fn pearson_correlation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let (ma, mb) = (mean(a), mean(b));
    let mut sab = 0.0;
    let mut saa = 0.0;
    let mut sbb = 0.0;
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    sab / (saa * sbb).sqrt()
}

/// Ordinary least-squares line fit.
#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits `y = slope * x + intercept` and reports the coefficient of
/// determination.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "need at least two points to fit a line");
    let mx = mean(xs);
    let my = mean(ys);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        let pred = slope * x + intercept;
        ss_res += (y - pred) * (y - pred);
        ss_tot += (y - my) * (y - my);
    }
    LinearFit {
        slope,
        intercept,
        r_squared: 1.0 - ss_res / ss_tot,
    }
}
