//! Simulation checks of the Laplace/BIC expansion of the marginal
//! likelihood in the conjugate Gaussian mean model (X ~ N(θ, 1), θ ~ N(0, τ²)).

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result};
use crate::rng::{shards, stream_rng};
use crate::special::{chi2_1_cdf, kolmogorov_sf};

/// Significance level used for the pass flag of a [`LabReport`].
pub const KS_LEVEL: f64 = 0.01;

/// Replication count below which a report carries a warning.
pub const MIN_REPS: u64 = 500;

/// Smallest prior scale accepted; smaller τ collapses the prior onto the null.
pub const MIN_TAU: f64 = 0.1;

/// log m(x) − (loglik at the MLE − (d/2)·log n).
pub fn bic_gap(loglik_mle: f64, d: u32, n: u64, log_marginal_exact: f64) -> Result<f64> {
    if n == 0 {
        return Err(invalid("bic gap needs n >= 1"));
    }
    Ok(log_marginal_exact - (loglik_mle - 0.5 * d as f64 * (n as f64).ln()))
}

/// Limit of the conjugate-normal gap at θ: log p(θ) + ½log 2π, i.e.
/// −log τ − θ²/(2τ²) for unit Fisher information.
pub fn bic_gap_limit(theta: f64, tau: f64) -> f64 {
    -tau.ln() - theta * theta / (2.0 * tau * tau)
}

/// Sufficient statistics of a sample: n, Σx, Σ(x − x̄)².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub n: u64,
    pub sum: f64,
    pub centered_ss: f64,
}

impl Summary {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as u64;
        let sum: f64 = xs.iter().sum();
        let mean = sum / n.max(1) as f64;
        let centered_ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
        Self {
            n,
            sum,
            centered_ss,
        }
    }

    fn raw_ss(&self) -> f64 {
        self.centered_ss + self.sum * self.sum / self.n as f64
    }
}

/// Exact log marginal likelihood of the sample under θ ~ N(0, τ²):
/// −(n/2)log 2π − ½Σx² − ½log(1 + nτ²) + S²τ²/(2(1 + nτ²)).
pub fn conjugate_log_marginal(s: &Summary, tau: f64) -> f64 {
    let nf = s.n as f64;
    let k = 1.0 + nf * tau * tau;
    -0.5 * nf * std::f64::consts::TAU.ln() - 0.5 * s.raw_ss() - 0.5 * k.ln()
        + s.sum * s.sum * tau * tau / (2.0 * k)
}

/// Log likelihood at θ̂ = x̄: −(n/2)log 2π − ½Σ(x − x̄)².
pub fn loglik_at_mle(s: &Summary) -> f64 {
    -0.5 * s.n as f64 * std::f64::consts::TAU.ln() - 0.5 * s.centered_ss
}

/// Log likelihood at a fixed θ.
pub fn loglik_at(s: &Summary, theta: f64) -> f64 {
    let nf = s.n as f64;
    let mean = s.sum / nf;
    -0.5 * nf * std::f64::consts::TAU.ln()
        - 0.5 * (s.centered_ss + nf * (mean - theta) * (mean - theta))
}

/// n draws from N(theta, 1), split into seeded shards.
pub fn simulate_summary(n: u64, theta: f64, seed: u64) -> Summary {
    let xs: Vec<f64> = shards(n)
        .into_par_iter()
        .flat_map_iter(|(stream, count)| {
            let mut rng = stream_rng(seed, stream);
            (0..count).map(move |_| theta + rng.sample::<f64, _>(StandardNormal))
        })
        .collect();
    Summary::of(&xs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BicPoint {
    pub n: u64,
    pub log_marginal: f64,
    pub loglik_mle: f64,
    pub gap: f64,
}

/// BIC gap on simulated data at each n. Sample i uses seed `seed + i`.
pub fn bic_sweep(ns: &[u64], theta_true: f64, tau: f64, seed: u64) -> Result<Vec<BicPoint>> {
    if !(tau >= MIN_TAU && tau.is_finite()) {
        return Err(invalid(format!(
            "prior scale tau must be >= {MIN_TAU}, got {tau}"
        )));
    }
    ns.iter()
        .enumerate()
        .map(|(i, &n)| {
            if n == 0 {
                return Err(invalid("bic sweep needs n >= 1"));
            }
            let s = simulate_summary(n, theta_true, seed.wrapping_add(i as u64));
            let log_marginal = conjugate_log_marginal(&s, tau);
            let loglik_mle = loglik_at_mle(&s);
            Ok(BicPoint {
                n,
                log_marginal,
                loglik_mle,
                gap: bic_gap(loglik_mle, 1, n, log_marginal)?,
            })
        })
        .collect()
}

/// Kolmogorov–Smirnov distance to `cdf` and its asymptotic p-value with
/// the (√N + 0.12 + 0.11/√N) small-sample correction.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    if samples.is_empty() || samples.iter().any(|x| x.is_nan()) {
        return Err(invalid("ks test needs a non-empty sample without NaN"));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).expect("no NaN"));
    let nf = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i as f64 + 1.0) / nf - f).max(f - i as f64 / nf)
        })
        .fold(0.0, f64::max);
    let root = nf.sqrt();
    Ok((d, kolmogorov_sf((root + 0.12 + 0.11 / root) * d)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabReport {
    pub n: u64,
    pub reps: u64,
    pub seed: u64,
    pub tau: f64,
    /// Realized 2D per replication.
    pub statistic_samples: Vec<f64>,
    pub reference: &'static str,
    pub ks_stat: f64,
    pub ks_p: f64,
    pub level: f64,
    pub pass: bool,
    /// Sample mean of D and its standard error; the limit is 1/2.
    pub mean_d: f64,
    pub se_mean_d: f64,
    pub warning: Option<String>,
}

/// Per replication, draws n observations at θ* = 0 and forms
/// D = log(m/f(x|θ*)) + ½log(n/2π) − log ϑ with ϑ = p(θ*)/√I(θ*), then
/// compares 2D with χ²₁. Replication r uses stream r of `seed`.
pub fn dawid_check(n: u64, reps: u64, seed: u64, tau: f64) -> Result<LabReport> {
    if !(tau >= MIN_TAU && tau.is_finite()) {
        return Err(invalid(format!(
            "prior scale tau must be >= {MIN_TAU}, got {tau}"
        )));
    }
    if n == 0 || reps < 2 {
        return Err(invalid(format!(
            "need n >= 1 and reps >= 2, got ({n}, {reps})"
        )));
    }
    let nf = n as f64;
    let log_theta = -(tau * std::f64::consts::TAU.sqrt()).ln();
    let twice_d: Vec<f64> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(seed, r);
            let xs: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let s = Summary::of(&xs);
            let log_ratio = conjugate_log_marginal(&s, tau) - loglik_at(&s, 0.0);
            2.0 * (log_ratio + 0.5 * (nf / std::f64::consts::TAU).ln() - log_theta)
        })
        .collect();
    let (ks_stat, ks_p) = ks_test(&twice_d, chi2_1_cdf)?;
    let rf = reps as f64;
    let mean_d = twice_d.iter().sum::<f64>() / (2.0 * rf);
    let var_d = twice_d
        .iter()
        .map(|v| (v / 2.0 - mean_d).powi(2))
        .sum::<f64>()
        / (rf - 1.0);
    let warning = (reps < MIN_REPS)
        .then(|| format!("reps = {reps} is below {MIN_REPS}; the KS p-value is unreliable"));
    Ok(LabReport {
        n,
        reps,
        seed,
        tau,
        statistic_samples: twice_d,
        reference: "chi2_1",
        ks_stat,
        ks_p,
        level: KS_LEVEL,
        pass: ks_p > KS_LEVEL,
        mean_d,
        se_mean_d: (var_d / rf).sqrt(),
        warning,
    })
}
