//! Standard normal distribution and the few related special functions the
//! crate needs.
//!
//! The CDF goes through `erfc` so both tails keep full relative precision;
//! `1 - Φ(x)` is never formed by subtraction.

use crate::scalar::Scalar;

/// φ(x), the standard normal density.
pub fn norm_pdf<T: Scalar>(x: T) -> T {
    let half = T::lit(0.5);
    (-half * x * x).exp() / (T::TAU()).sqrt()
}

/// log φ(x).
pub fn norm_ln_pdf<T: Scalar>(x: T) -> T {
    let half = T::lit(0.5);
    -half * x * x - half * T::TAU().ln()
}

/// Φ(x).
pub fn norm_cdf<T: Scalar>(x: T) -> T {
    T::lit(0.5) * (-x * T::FRAC_1_SQRT_2()).complementary_erf()
}

/// 1 − Φ(x), accurate deep in the upper tail.
pub fn norm_sf<T: Scalar>(x: T) -> T {
    T::lit(0.5) * (x * T::FRAC_1_SQRT_2()).complementary_erf()
}

/// log(1 − Φ(x)), finite far beyond the underflow point of 1 − Φ(x).
pub fn norm_log_sf<T: Scalar>(x: T) -> T {
    if x < T::lit(30.0) {
        return norm_sf(x).ln();
    }
    // Asymptotic Mills-ratio series; the omitted term is below 1e-12 here.
    let r = (x * x).recip();
    let series = T::one() - r + T::lit(3.0) * r * r - T::lit(15.0) * r * r * r
        + T::lit(105.0) * r * r * r * r;
    -T::lit(0.5) * x * x - (x * T::TAU().sqrt()).ln() + series.ln()
}

/// P(|Z| > z) = 2(1 − Φ(|z|)).
pub fn norm_two_sided<T: Scalar>(z: T) -> T {
    (z.abs() * T::FRAC_1_SQRT_2()).complementary_erf()
}

// Rational approximation coefficients for the initial quantile guess
// (relative error about 1.2e-9), refined below by a Halley step.
const QA: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const QB: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const QC: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const QD: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

fn quantile_guess(p: f64) -> f64 {
    const P_LOW: f64 = 0.02425;
    let poly = |c: &[f64], x: f64| c.iter().fold(0.0, |acc, &k| acc * x + k);
    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        poly(&QC, q) / (poly(&QD, q) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        poly(&QA, r) * q / (poly(&QB, r) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -poly(&QC, q) / (poly(&QD, q) * q + 1.0)
    }
}

/// Φ⁻¹(p) for p in (0, 1). Returns ∓∞ at the endpoints and NaN outside.
pub fn norm_quantile<T: Scalar>(p: T) -> T {
    if p.is_nan() || p < T::zero() || p > T::one() {
        return T::nan();
    }
    if p == T::zero() {
        return T::neg_infinity();
    }
    if p == T::one() {
        return T::infinity();
    }
    let mut x = T::lit(quantile_guess(p.as_f64()));
    // Halley refinement, done on whichever tail keeps the residual precise.
    for _ in 0..2 {
        let e = if x <= T::zero() {
            norm_cdf(x) - p
        } else {
            (T::one() - p) - norm_sf(x)
        };
        let u = e * T::TAU().sqrt() * (T::lit(0.5) * x * x).exp();
        x = x - u / (T::one() + T::lit(0.5) * x * u);
    }
    x
}

/// CDF of the χ² distribution with one degree of freedom: 2Φ(√x) − 1.
pub fn chi2_1_cdf<T: Scalar>(x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    T::one() - norm_two_sided(x.sqrt())
}

/// Kolmogorov limiting survival function Q(λ) = P(K > λ).
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.18 {
        // Small-λ form converges quickly where the alternating series does not.
        let y = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let s: f64 = (1..=8)
            .map(|k| {
                let m = (2 * k - 1) as f64;
                (y * m * m).exp()
            })
            .sum();
        (1.0 - (std::f64::consts::TAU).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let mut sum = 0.0;
        for k in 1..=100 {
            let kf = k as f64;
            let term = (-2.0 * kf * kf * lambda * lambda).exp();
            sum += if k % 2 == 1 { term } else { -term };
            if term < 1e-18 {
                break;
            }
        }
        (2.0 * sum).clamp(0.0, 1.0)
    }
}

/// Natural log of the binomial coefficient C(n, k).
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let (n, k) = (n as f64, k as f64);
    libm::lgamma(n + 1.0) - libm::lgamma(k + 1.0) - libm::lgamma(n - k + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cdf_reference_values() {
        assert_relative_eq!(norm_cdf(0.0_f64), 0.5, epsilon = 1e-16);
        assert_relative_eq!(norm_cdf(1.959963984540054_f64), 0.975, epsilon = 1e-15);
        // 1 - Φ(5) from high-precision tables.
        assert_relative_eq!(norm_sf(5.0_f64), 2.866515718791939e-7, max_relative = 1e-13);
        assert_relative_eq!(
            norm_sf(10.0_f64),
            7.619853024160527e-24,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            norm_cdf(-10.0_f64),
            7.619853024160527e-24,
            max_relative = 1e-12
        );
    }

    #[test]
    fn log_sf_is_continuous_at_switch() {
        let below = norm_sf(29.999_999_f64).ln();
        let above = norm_log_sf(30.0_f64);
        assert!((below - above).abs() < 1e-4);
        assert_relative_eq!(
            norm_log_sf(30.0_f64),
            norm_sf(30.0_f64).ln(),
            max_relative = 1e-13
        );
        assert_relative_eq!(norm_log_sf(2.0_f64), norm_sf(2.0_f64).ln(), epsilon = 1e-15);
        assert!(norm_log_sf(1e3_f64).is_finite());
    }

    #[test]
    fn quantile_inverts_cdf() {
        for &p in &[1e-300, 1e-12, 1e-4, 0.02, 0.3, 0.5, 0.77, 0.975, 0.999_999] {
            let x = norm_quantile(p);
            assert_relative_eq!(norm_cdf(x), p, max_relative = 1e-13);
        }
        assert_relative_eq!(norm_quantile(0.975_f64), 1.959963984540054, epsilon = 1e-14);
        assert!(norm_quantile(1.5_f64).is_nan());
        assert_eq!(norm_quantile(0.0_f64), f64::NEG_INFINITY);
    }

    #[test]
    fn quantile_f32() {
        let x: f32 = norm_quantile(0.975_f32);
        assert!((x - 1.959_964).abs() < 1e-5);
    }

    #[test]
    fn chi2_cdf_matches_known_quantile() {
        // 95% quantile of χ²₁ is 1.959964² = 3.841459.
        assert_relative_eq!(chi2_1_cdf(3.841458820694124_f64), 0.95, epsilon = 1e-14);
        assert_eq!(chi2_1_cdf(-1.0_f64), 0.0);
    }

    #[test]
    fn kolmogorov_branches_agree() {
        // Both series are valid around the switch point.
        let lam = 1.18;
        let small = {
            let y = -std::f64::consts::PI.powi(2) / (8.0 * lam * lam);
            let s: f64 = (1..=8)
                .map(|k| (y * ((2 * k - 1) as f64).powi(2)).exp())
                .sum();
            1.0 - std::f64::consts::TAU.sqrt() / lam * s
        };
        assert_relative_eq!(small, kolmogorov_sf(lam), max_relative = 1e-10);
        // Q(1.3581) ≈ 0.05 (classical 5% critical value).
        assert!((kolmogorov_sf(1.3581) - 0.05).abs() < 1e-4);
        assert_eq!(kolmogorov_sf(0.0), 1.0);
    }

    #[test]
    fn ln_choose_small() {
        assert_relative_eq!(ln_choose(10, 3).exp(), 120.0, max_relative = 1e-12);
        assert_eq!(ln_choose(3, 4), f64::NEG_INFINITY);
    }
}
