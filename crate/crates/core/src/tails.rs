//! Two-sided tail probabilities P(|X̄ₙ − θ₀| > λ) across deviation regimes:
//! the polynomial moderate-deviation approximation, the exact Gaussian
//! tail, and a seeded Monte Carlo estimate for the builtin families.

use std::fmt;

use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::{deviation_exceeds, Family, FamilyKind};
use crate::rng::{shards, stream_rng};
use crate::scalar::Scalar;
use crate::special::norm_two_sided;

/// How the deviation λₙ scales with n.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", content = "value", rename_all = "snake_case")]
pub enum ScaleRule<T> {
    /// λₙ = c/√n.
    COverSqrtN(T),
    /// λₙ = a·√(log n / n).
    RsBoundary(T),
    /// λₙ = c.
    Fixed(T),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Regime {
    Clt,
    Moderate,
    Large,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::Clt => "CLT",
            Regime::Moderate => "MODERATE",
            Regime::Large => "LARGE",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeLabel<T> {
    pub label: Regime,
    /// √n·λₙ/σ.
    pub z: T,
    pub lambda: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMethod {
    ModerateDeviation,
    ExactGaussian,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate<T> {
    pub value: T,
    /// Standard error; 0 for analytic values. With zero Monte Carlo hits it
    /// holds the one-sided 95% upper bound instead.
    pub se: T,
    pub method: TailMethod,
}

impl<T: Scalar> ScaleRule<T> {
    /// λₙ for this rule.
    pub fn lambda(&self, n: u64) -> T {
        let nn = T::count(n);
        match *self {
            ScaleRule::COverSqrtN(c) => c / nn.sqrt(),
            ScaleRule::RsBoundary(a) => a * (nn.ln() / nn).sqrt(),
            ScaleRule::Fixed(c) => c,
        }
    }
}

/// Regime of a deviation sequence and the implied standardized deviation.
pub fn classify_regime<T: Scalar>(rule: ScaleRule<T>, n: u64, sigma: T) -> Result<RegimeLabel<T>> {
    if n < 3 {
        return Err(Error::Domain {
            what: "sample size",
            value: n as f64,
            domain: "n >= 3".into(),
        });
    }
    if !(sigma > T::zero()) {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    let (ScaleRule::COverSqrtN(c) | ScaleRule::RsBoundary(c) | ScaleRule::Fixed(c)) = rule;
    if !(c > T::zero() && c.is_finite()) {
        return Err(invalid(format!("scale constant must be positive, got {c}")));
    }
    let lambda = rule.lambda(n);
    let label = match rule {
        ScaleRule::COverSqrtN(_) => Regime::Clt,
        ScaleRule::RsBoundary(_) => Regime::Moderate,
        ScaleRule::Fixed(_) => Regime::Large,
    };
    Ok(RegimeLabel {
        label,
        z: T::count(n).sqrt() * lambda / sigma,
        lambda,
    })
}

/// √2·σ / (a·√(π log n)) · n^{−a²/2σ²}, the polynomial approximation to
/// P(|X̄ₙ − θ₀| > a√(log n / n)). Clamped to 1 for small n.
pub fn tail_moderate_deviation<T: Scalar>(n: u64, a: T, sigma: T) -> Result<TailEstimate<T>> {
    if n < 3 || !(a > T::zero()) || !(sigma > T::zero()) {
        return Err(invalid(format!(
            "need n >= 3, a > 0, sigma > 0; got ({n}, {a}, {sigma})"
        )));
    }
    let log_n = T::count(n).ln();
    let r = a / sigma;
    let log_value =
        (T::lit(2.0).sqrt() / (r * (T::PI() * log_n).sqrt())).ln() - r * r * T::lit(0.5) * log_n;
    Ok(TailEstimate {
        value: log_value.exp().min(T::one()),
        se: T::zero(),
        method: TailMethod::ModerateDeviation,
    })
}

/// 2(1 − Φ(√n·λ/σ)).
pub fn tail_exact_gaussian<T: Scalar>(n: u64, lambda: T, sigma: T) -> Result<TailEstimate<T>> {
    if n == 0 || lambda < T::zero() || !(sigma > T::zero()) {
        return Err(invalid(format!(
            "need n >= 1, lambda >= 0, sigma > 0; got ({n}, {lambda}, {sigma})"
        )));
    }
    Ok(TailEstimate {
        value: norm_two_sided(T::count(n).sqrt() * lambda / sigma),
        se: T::zero(),
        method: TailMethod::ExactGaussian,
    })
}

/// Smallest replication count accepted by [`mc_tail`].
pub const MIN_REPS: u64 = 10_000;

/// Fraction of `reps` simulated sample means with |X̄ₙ − θ₀| > λ.
///
/// Work is split into fixed shards, each on its own stream of `seed`, so the
/// estimate is identical for any thread count.
pub fn mc_tail(
    family: &Family<f64>,
    n: u64,
    lambda: f64,
    reps: u64,
    seed: u64,
) -> Result<TailEstimate<f64>> {
    if reps < MIN_REPS {
        return Err(invalid(format!(
            "mc_tail needs reps >= {MIN_REPS}, got {reps}"
        )));
    }
    if n == 0 || !(lambda >= 0.0) {
        return Err(invalid(format!(
            "need n >= 1 and lambda >= 0, got ({n}, {lambda})"
        )));
    }
    let center = family.mean();
    let hits: u64 = match family.kind() {
        FamilyKind::Gaussian { mean, sigma } => {
            let sd = sigma / (n as f64).sqrt();
            count_hits(reps, seed, |rng| {
                let z: f64 = rng.sample(StandardNormal);
                deviation_exceeds(mean + sd * z, center, lambda)
            })
        }
        FamilyKind::Bernoulli { p0 } => {
            let binom = Binomial::new(n, *p0).map_err(|e| invalid(e.to_string()))?;
            let nf = n as f64;
            count_hits(reps, seed, |rng| {
                deviation_exceeds(binom.sample(rng) as f64 / nf, center, lambda)
            })
        }
        FamilyKind::Custom(c) => {
            return Err(Error::Unsupported(format!(
                "family {} has no sampler",
                c.name
            )));
        }
    };
    let r = reps as f64;
    let value = hits as f64 / r;
    let se = if hits == 0 {
        1.0 - 0.05_f64.powf(1.0 / r)
    } else {
        (value * (1.0 - value) / r).sqrt()
    };
    Ok(TailEstimate {
        value,
        se,
        method: TailMethod::MonteCarlo,
    })
}

fn count_hits<F>(reps: u64, seed: u64, hit: F) -> u64
where
    F: Fn(&mut rand_chacha::ChaCha8Rng) -> bool + Sync,
{
    shards(reps)
        .into_par_iter()
        .map(|(stream, count)| {
            let mut rng = stream_rng(seed, stream);
            (0..count).filter(|_| hit(&mut rng)).count() as u64
        })
        .sum()
}

/// Significance level of the Bayes rule at log-odds offset A,
/// √(2/π)·e^{−A/2} / √(n log n).
pub fn lindley_alpha<T: Scalar>(n: u64, big_a: T) -> Result<T> {
    if n < 3 {
        return Err(Error::Domain {
            what: "sample size",
            value: n as f64,
            domain: "n >= 3".into(),
        });
    }
    let nn = T::count(n);
    Ok((T::lit(2.0) / T::PI()).sqrt() * (-T::lit(0.5) * big_a).exp() / (nn * nn.ln()).sqrt())
}
