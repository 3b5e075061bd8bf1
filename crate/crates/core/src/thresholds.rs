//! Rejection thresholds on the t = √n(x̄ − θ₀)/σ scale.
//!
//! The asymptotic formulas return t² as a sum of named terms so callers can
//! see where each part of the cutoff comes from. The numeric threshold
//! solves the exact finite-n Bayes rule instead.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evidence::{evidence, normalize_odds, Problem, Sampling};
use crate::optimize::bisect;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Known-σ Gaussian formula.
    AsymptoticThm1,
    /// Exponential-family formula with Fisher information in place of σ⁻².
    AsymptoticThm2,
    /// Root of the quadrature Bayes factor against the odds cutoff.
    NumericRoot,
    Horseshoe,
    Rs,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::AsymptoticThm1 => "asymptotic_thm1",
            Method::AsymptoticThm2 => "asymptotic_thm2",
            Method::NumericRoot => "numeric_root",
            Method::Horseshoe => "horseshoe",
            Method::Rs => "rs",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Additive pieces of an asymptotic t².
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdTerms<T> {
    pub log_n: T,
    /// log(c_π⁻²), or −2 log log n for the horseshoe.
    pub prior_term: T,
    /// −log(2πσ²), or log I − log 2π.
    pub info_term: T,
    /// 2 log(π₀L₀ / π_aL₁).
    pub odds_term: T,
}

impl<T: Scalar> ThresholdTerms<T> {
    pub fn sum(&self) -> T {
        self.log_n + self.prior_term + self.info_term + self.odds_term
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold<T> {
    pub n: u64,
    pub t_crit_sq: T,
    /// √t_crit_sq; `None` when t_crit_sq is negative.
    pub t_crit: Option<T>,
    pub terms: Option<ThresholdTerms<T>>,
    pub method: Method,
    /// Order of the neglected remainder in t².
    pub remainder: &'static str,
    /// Unstated O(1) constant that was fixed by convention, if any.
    pub assumed_constant: Option<T>,
}

impl<T: Scalar> Threshold<T> {
    fn from_terms(
        n: u64,
        terms: ThresholdTerms<T>,
        method: Method,
        remainder: &'static str,
    ) -> Self {
        let t_crit_sq = terms.sum();
        Self {
            n,
            t_crit_sq,
            t_crit: (t_crit_sq >= T::zero()).then(|| t_crit_sq.sqrt()),
            terms: Some(terms),
            method,
            remainder,
            assumed_constant: None,
        }
    }

    /// t_crit_sq − log n.
    pub fn constant(&self) -> T {
        self.t_crit_sq - T::count(self.n).ln()
    }
}

fn check_n(n: u64, min: u64) -> Result<()> {
    if n < min {
        return Err(Error::Domain {
            what: "sample size",
            value: n as f64,
            domain: format!("n >= {min}"),
        });
    }
    Ok(())
}

fn check_positive<T: Scalar>(what: &'static str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value: v.as_f64(),
            domain: "(0, inf)".into(),
        })
    }
}

fn odds_term<T: Scalar>(pi0: T, pia: T) -> Result<T> {
    let (pi0, pia) = normalize_odds(pi0, pia)?;
    Ok(T::lit(2.0) * (pi0 / pia).ln())
}

// Shared by both formulas so fisher = 1/σ² reproduces the Gaussian term bit for bit.
fn info_term<T: Scalar>(fisher: T) -> T {
    -(T::TAU() / fisher).ln()
}

/// t² = log n + log(c_π⁻²) − log(2πσ²) + 2 log(π₀/π_a).
pub fn gaussian_threshold<T: Scalar>(
    n: u64,
    sigma: T,
    c_pi: T,
    pi0: T,
    pia: T,
) -> Result<Threshold<T>> {
    check_n(n, 2)?;
    check_positive("sigma", sigma)?;
    check_positive("c_pi", c_pi)?;
    let terms = ThresholdTerms {
        log_n: T::count(n).ln(),
        prior_term: -T::lit(2.0) * c_pi.ln(),
        info_term: info_term(T::one() / (sigma * sigma)),
        odds_term: odds_term(pi0, pia)?,
    };
    Ok(Threshold::from_terms(
        n,
        terms,
        Method::AsymptoticThm1,
        "O(sqrt(log n / n))",
    ))
}

/// S² = log n + log(c_π⁻²) + log I − log 2π + 2 log(π₀/π_a).
pub fn expfam_threshold<T: Scalar>(
    n: u64,
    fisher: T,
    c_pi: T,
    pi0: T,
    pia: T,
) -> Result<Threshold<T>> {
    check_n(n, 2)?;
    check_positive("fisher information", fisher)?;
    check_positive("c_pi", c_pi)?;
    let terms = ThresholdTerms {
        log_n: T::count(n).ln(),
        prior_term: -T::lit(2.0) * c_pi.ln(),
        info_term: info_term(fisher),
        odds_term: odds_term(pi0, pia)?,
    };
    Ok(Threshold::from_terms(
        n,
        terms,
        Method::AsymptoticThm2,
        "O(sqrt(log n / n))",
    ))
}

/// Exact finite-n boundary: the positive t where the quadrature BF₀₁
/// equals the Bayes-rule cutoff, searched on (0, √(4 log n)).
pub fn numeric_threshold<T: Scalar>(problem: &Problem<T>, n: u64) -> Result<Threshold<T>> {
    check_n(n, 2)?;
    problem.prior.require_proper()?;
    let log_cutoff = problem.odds_cutoff().ln();
    let hi = (T::lit(4.0) * T::count(n).ln()).sqrt();
    let gap = |t: T| -> T {
        let xbar = match problem.xbar_at(t, n) {
            Ok(x) => x,
            Err(_) => return T::nan(),
        };
        match evidence(problem, xbar, n) {
            Ok(e) => e.log_bf01 - log_cutoff,
            Err(_) => T::nan(),
        }
    };
    // Surface evaluation errors (unsupported sampling, quadrature failure)
    // before bisection turns them into a missing sign change.
    evidence(problem, problem.xbar_at(hi, n)?, n)?;
    let root = bisect(gap, T::zero(), hi, T::tol(1e-10))?;
    Ok(Threshold {
        n,
        t_crit_sq: root * root,
        t_crit: Some(root),
        terms: None,
        method: Method::NumericRoot,
        remainder: "exact",
        assumed_constant: None,
    })
}

/// t² = log n − 2 log log n with the O(1) constant set to 0.
pub fn horseshoe_threshold<T: Scalar>(n: u64) -> Result<Threshold<T>> {
    check_n(n, 16)?;
    let log_n = T::count(n).ln();
    let terms = ThresholdTerms {
        log_n,
        prior_term: -T::lit(2.0) * log_n.ln(),
        info_term: T::zero(),
        odds_term: T::zero(),
    };
    let mut out = Threshold::from_terms(n, terms, Method::Horseshoe, "O(1)");
    out.assumed_constant = Some(T::zero());
    Ok(out)
}

/// Deviation-scale threshold √(log n / n)·√(λ + k) with c_n = 0.
pub fn rs_threshold<T: Scalar>(n: u64, k: u64, lambda_exp: T) -> Result<T> {
    check_n(n, 2)?;
    let kk = T::count(k);
    if !(lambda_exp + kk > T::zero()) {
        return Err(Error::Domain {
            what: "lambda_exp",
            value: lambda_exp.as_f64(),
            domain: format!("(-{k}, inf)"),
        });
    }
    let nn = T::count(n);
    Ok((nn.ln() / nn).sqrt() * (lambda_exp + kk).sqrt())
}

/// [`rs_threshold`] restated on the t scale, t = √n·λₙ/σ.
pub fn rs_threshold_t<T: Scalar>(n: u64, k: u64, lambda_exp: T, sigma: T) -> Result<Threshold<T>> {
    check_positive("sigma", sigma)?;
    let lam = rs_threshold(n, k, lambda_exp)?;
    let t = T::count(n).sqrt() * lam / sigma;
    Ok(Threshold {
        n,
        t_crit_sq: t * t,
        t_crit: Some(t),
        terms: None,
        method: Method::Rs,
        remainder: "o(1)",
        assumed_constant: Some(T::zero()),
    })
}

impl<T: Scalar> Problem<T> {
    /// Asymptotic threshold for this problem: the known-σ formula for
    /// Gaussian sampling, the Fisher-information formula otherwise. Loss
    /// weights enter through the odds term.
    pub fn asymptotic_threshold(&self, n: u64) -> Result<Threshold<T>> {
        let c_pi = self.c_pi()?;
        let (w0, wa) = (self.pi0 * self.loss0, self.pia * self.loss1);
        match &self.sampling {
            Sampling::Gaussian { sigma } => gaussian_threshold(n, *sigma, c_pi, w0, wa),
            Sampling::ExpFamily(f) => expfam_threshold(n, f.fisher_information(), c_pi, w0, wa),
        }
    }
}
