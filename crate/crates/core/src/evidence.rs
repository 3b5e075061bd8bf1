//! Marginal likelihoods, Bayes factors and posterior null probabilities for
//! the point null H₀: θ = θ₀ against a prior-mixed alternative.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::{Family, FamilyKind};
use crate::priors::Prior;
use crate::quad::{feature_breaks, Quadrature};
use crate::scalar::Scalar;
use crate::special::norm_pdf;

/// How the data are modelled.
#[derive(Debug, Clone)]
pub enum Sampling<T> {
    /// X̄ ~ N(θ, σ²/n) with σ known.
    Gaussian { sigma: T },
    /// One-parameter exponential family, handled through its local
    /// asymptotic normal approximation.
    ExpFamily(Family<T>),
}

/// A point-null testing problem: null value, sampling model, prior on the
/// alternative, prior model probabilities and loss weights.
///
/// `loss0` is the cost of rejecting a true null, `loss1` the cost of
/// accepting a false one.
#[derive(Debug, Clone)]
pub struct Problem<T> {
    pub theta0: T,
    pub sampling: Sampling<T>,
    pub prior: Prior<T>,
    pub pi0: T,
    pub pia: T,
    pub loss0: T,
    pub loss1: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Evidence<T> {
    pub bf01: T,
    pub log_bf01: T,
    pub m_a: T,
    pub f0: T,
    pub post_h0: T,
}

impl<T: Scalar> Problem<T> {
    /// Known-σ Gaussian problem with equal prior odds and 0–1 loss.
    pub fn gaussian(theta0: T, sigma: T, prior: Prior<T>) -> Result<Self> {
        if !(sigma > T::zero() && sigma.is_finite()) || !theta0.is_finite() {
            return Err(invalid(format!(
                "need finite theta0 and sigma > 0, got ({theta0}, {sigma})"
            )));
        }
        let half = T::lit(0.5);
        Ok(Self {
            theta0,
            sampling: Sampling::Gaussian { sigma },
            prior,
            pi0: half,
            pia: half,
            loss0: T::one(),
            loss1: T::one(),
        })
    }

    /// Exponential-family problem; θ₀ is the family's null mean.
    pub fn exp_family(family: Family<T>, prior: Prior<T>) -> Self {
        let half = T::lit(0.5);
        Self {
            theta0: family.theta0(),
            sampling: Sampling::ExpFamily(family),
            prior,
            pi0: half,
            pia: half,
            loss0: T::one(),
            loss1: T::one(),
        }
    }

    /// Sets prior model weights; any positive pair is normalized to sum to one.
    pub fn with_odds(mut self, pi0: T, pia: T) -> Result<Self> {
        let (pi0, pia) = normalize_odds(pi0, pia)?;
        self.pi0 = pi0;
        self.pia = pia;
        Ok(self)
    }

    pub fn with_losses(mut self, loss0: T, loss1: T) -> Result<Self> {
        if !(loss0 > T::zero() && loss1 > T::zero() && loss0.is_finite() && loss1.is_finite()) {
            return Err(invalid(format!(
                "losses must be positive, got ({loss0}, {loss1})"
            )));
        }
        self.loss0 = loss0;
        self.loss1 = loss1;
        Ok(self)
    }

    /// Known sampling standard deviation of one observation.
    ///
    /// Errors for non-Gaussian families, which have no known-σ path.
    pub fn sigma(&self) -> Result<T> {
        match &self.sampling {
            Sampling::Gaussian { sigma } => Ok(*sigma),
            Sampling::ExpFamily(f) => match f.kind() {
                FamilyKind::Gaussian { sigma, .. } => Ok(*sigma),
                _ => Err(Error::Unsupported(format!(
                    "{} family has no known-sigma Gaussian path",
                    f.name()
                ))),
            },
        }
    }

    /// Fisher information about the mean at the null.
    pub fn fisher_information(&self) -> T {
        match &self.sampling {
            Sampling::Gaussian { sigma } => T::one() / (*sigma * *sigma),
            Sampling::ExpFamily(f) => f.fisher_information(),
        }
    }

    /// Bayes-rule cutoff: reject H₀ when BF₀₁ < π_a·L₁ / (π₀·L₀).
    pub fn odds_cutoff(&self) -> T {
        self.pia * self.loss1 / (self.pi0 * self.loss0)
    }

    /// c_π = π(θ₀).
    pub fn c_pi(&self) -> Result<T> {
        self.prior.local_density(self.theta0)
    }

    /// t = √n (x̄ − θ₀)/σ.
    pub fn standardize(&self, xbar: T, n: u64) -> Result<T> {
        Ok(T::count(n).sqrt() * (xbar - self.theta0) / self.sigma()?)
    }

    /// Inverse of [`Problem::standardize`].
    pub fn xbar_at(&self, t: T, n: u64) -> Result<T> {
        Ok(self.theta0 + t * self.sigma()? / T::count(n).sqrt())
    }
}

pub(crate) fn normalize_odds<T: Scalar>(pi0: T, pia: T) -> Result<(T, T)> {
    if !(pi0 > T::zero() && pia > T::zero() && pi0.is_finite() && pia.is_finite()) {
        return Err(invalid(format!(
            "prior model weights must be positive, got ({pi0}, {pia})"
        )));
    }
    let s = pi0 + pia;
    Ok((pi0 / s, pia / s))
}

/// Leading term of the Gaussian Bayes factor expansion,
/// √n / (σ√(2π) c_π) · exp(−t²/2).
pub fn bf_gaussian_leading<T: Scalar>(n: u64, t: T, sigma: T, c_pi: T) -> T {
    T::count(n).sqrt() / (sigma * T::TAU().sqrt() * c_pi) * (-T::lit(0.5) * t * t).exp()
}

/// Exponential-family analogue, √(n I(θ₀)) / (√(2π) c_π) · exp(−S²/2)
/// for the standardized score S.
pub fn bf_expfam_leading<T: Scalar>(n: u64, score: T, fisher: T, c_pi: T) -> T {
    (T::count(n) * fisher).sqrt() / (T::TAU().sqrt() * c_pi) * (-T::lit(0.5) * score * score).exp()
}

/// Half-width of the u-window around 0 and around the prior centre; the
/// Gaussian factor beyond it is below e⁻⁷².
const U_BAND: f64 = 12.0;

/// m_a(x̄) = ∫ f(x̄|θ) π(θ) dθ for the known-σ Gaussian model, computed as
/// (2π)^{-1/2} ∫ e^{−u²/2} π(x̄ + σu/√n) du over a window covering |u| ≤ 12
/// and the prior centre ± 12.
pub fn marginal_quadrature<T: Scalar>(problem: &Problem<T>, xbar: T, n: u64) -> Result<T> {
    problem.prior.require_proper()?;
    if n == 0 {
        return Err(invalid("marginal likelihood needs n >= 1"));
    }
    let sigma = problem.sigma()?;
    let step = sigma / T::count(n).sqrt();
    let band = T::lit(U_BAND);
    let prior = problem.prior;
    let integrand = |u: T| norm_pdf(u) * prior.density(xbar + step * u);

    // Narrow priors put their mass around uc, possibly far outside |u| ≤ 12.
    let uc = (prior.center() - xbar) / step;
    let (lo, hi) = ((-band).min(uc - band), band.max(uc + band));
    let mut points = feature_breaks(lo, hi, uc, prior.scale().map_or(T::zero(), |s| s / step));
    points.extend(feature_breaks(lo, hi, T::zero(), T::one()));
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    let q = Quadrature::relative(1e-11);
    Ok(q.integrate_with_breaks(integrand, &points)?.value)
}

/// Closed-form marginal under a conjugate N(μ, τ²) prior: the N(μ, τ² + σ²/n)
/// density at x̄.
pub fn conjugate_marginal<T: Scalar>(xbar: T, n: u64, sigma: T, mu: T, tau: T) -> T {
    let var = tau * tau + sigma * sigma / T::count(n);
    let sd = var.sqrt();
    norm_pdf((xbar - mu) / sd) / sd
}

/// Null likelihood of x̄: the N(θ₀, σ²/n) density.
pub fn null_likelihood<T: Scalar>(problem: &Problem<T>, xbar: T, n: u64) -> Result<T> {
    let sd = problem.sigma()? / T::count(n).sqrt();
    Ok(norm_pdf((xbar - problem.theta0) / sd) / sd)
}

/// P(H₀ | data) from the Bayes factor by the odds identity.
pub fn posterior_null<T: Scalar>(bf01: T, pi0: T, pia: T) -> T {
    T::one() / (T::one() + (pia / pi0) / bf01)
}

/// Bayes factor, marginal and posterior null probability at x̄.
pub fn evidence<T: Scalar>(problem: &Problem<T>, xbar: T, n: u64) -> Result<Evidence<T>> {
    let m_a = marginal_quadrature(problem, xbar, n)?;
    let f0 = null_likelihood(problem, xbar, n)?;
    let bf01 = f0 / m_a;
    Ok(Evidence {
        bf01,
        log_bf01: f0.ln() - m_a.ln(),
        m_a,
        f0,
        post_h0: posterior_null(bf01, problem.pi0, problem.pia),
    })
}

/// Second-order local approximation to the marginal,
/// π(x̄) + σ²π″(x̄)/(2n). Diagnostic only; the leading Bayes factor term
/// uses c_π alone.
pub fn laplace_marginal<T: Scalar>(problem: &Problem<T>, xbar: T, n: u64) -> Result<T> {
    let sigma = problem.sigma()?;
    let taylor = problem.prior.taylor_at(xbar)?;
    Ok(taylor.pi + sigma * sigma * taylor.pi2 / (T::lit(2.0) * T::count(n)))
}

/// Standardized score S = √n (x̄ − ψ′(0)) √I for an exponential family,
/// with I the Fisher information about the mean.
pub fn standardized_score<T: Scalar>(family: &Family<T>, n: u64, xbar: T) -> T {
    T::count(n).sqrt() * (xbar - family.mean()) / family.variance().sqrt()
}

/// Bayes factor for an exponential-family problem from its local asymptotic
/// normal form (n, S, I(θ₀), c_π) only.
pub fn lan_evidence<T: Scalar>(problem: &Problem<T>, n: u64, score: T) -> Result<Evidence<T>> {
    let c_pi = problem.c_pi()?;
    let fisher = problem.fisher_information();
    let bf01 = bf_expfam_leading(n, score, fisher, c_pi);
    // On the standardized scale f0 is φ(S)·√(nI) and m_a ≈ c_π.
    let f0 = norm_pdf(score) * (T::count(n) * fisher).sqrt();
    Ok(Evidence {
        bf01,
        log_bf01: bf01.ln(),
        m_a: c_pi,
        f0,
        post_h0: posterior_null(bf01, problem.pi0, problem.pia),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn cauchy_problem() -> Problem<f64> {
        Problem::gaussian(0.0, 1.0, Prior::cauchy(0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn leading_term_examples() {
        let bf = bf_gaussian_leading(1000, 1.96, 1.0, 1.0 / PI);
        assert!((bf - 5.81).abs() < 0.01, "{bf}");
        assert_relative_eq!(
            bf_gaussian_leading(1, 0.0, 1.0, 1.0 / (2.0 * PI).sqrt()),
            1.0,
            epsilon = 1e-15
        );
        // √100·π/√(2π)·e^{−2.53125}, evaluated independently.
        let want = 10.0 * PI / (2.0 * PI).sqrt() * (-2.25_f64 * 2.25 / 2.0).exp();
        let got = bf_gaussian_leading(100, 2.25, 1.0, 1.0 / PI);
        assert_relative_eq!(got, want, max_relative = 1e-14);
        assert!((got - 0.997_130_570_344_3).abs() < 1e-12);
    }

    #[test]
    fn expfam_leading_examples() {
        for &(n, s, sig, c) in &[(10u64, 0.3, 2.0, 0.2), (1000, 2.5, 0.7, 1.0 / PI)] {
            let a = bf_expfam_leading(n, s, 1.0 / (sig * sig), c);
            let b = bf_gaussian_leading(n, s, sig, c);
            assert_relative_eq!(a, b, max_relative = 1e-14);
        }
        assert_relative_eq!(
            bf_expfam_leading(100, 0.0, 1.0, 1.0 / (2.0 * PI).sqrt()),
            10.0,
            epsilon = 1e-13
        );
        let v = bf_expfam_leading(400, 2.0, 4.0, 1.0);
        assert_relative_eq!(
            v,
            40.0 / (2.0 * PI).sqrt() * (-2.0_f64).exp(),
            max_relative = 1e-14
        );
        assert!((v - 2.159).abs() < 1e-3);
    }

    #[test]
    fn quadrature_matches_conjugate_marginal() {
        for &tau in &[0.05, 1.0, 5.0] {
            let p = Problem::gaussian(0.0, 1.0, Prior::gaussian(0.2, tau).unwrap()).unwrap();
            for &n in &[10u64, 100, 1000] {
                for &t in &[-3.0, -0.5, 0.0, 1.7, 4.0] {
                    let xbar = t / (n as f64).sqrt();
                    let q = marginal_quadrature(&p, xbar, n).unwrap();
                    let c = conjugate_marginal(xbar, n, 1.0, 0.2, tau);
                    assert!(
                        ((q - c) / c).abs() <= 1e-9,
                        "tau={tau} n={n} t={t}: {q} vs {c}"
                    );
                }
            }
        }
    }

    #[test]
    fn cauchy_quadrature_close_to_leading_at_lindley_point() {
        let p = cauchy_problem();
        let n = 1000;
        let xbar = 1.96 / (n as f64).sqrt();
        let e = evidence(&p, xbar, n).unwrap();
        let lead = bf_gaussian_leading(n, 1.96, 1.0, 1.0 / PI);
        assert!((e.bf01 / lead - 1.0).abs() < 0.02);
        assert!((e.post_h0 - 5.8 / 6.8).abs() < 0.005, "{}", e.post_h0);
    }

    #[test]
    fn null_best_supported_at_zero() {
        let e = evidence(&cauchy_problem(), 0.0, 10).unwrap();
        assert!(e.m_a > 0.0);
        assert!(e.bf01 > 1.0);
        assert_relative_eq!(e.log_bf01, e.bf01.ln(), max_relative = 1e-13);
    }

    #[test]
    fn posterior_odds_identity_examples() {
        assert_eq!(posterior_null(1.0, 0.5, 0.5), 0.5);
        assert_relative_eq!(posterior_null(1.0, 0.9, 0.1), 0.9, epsilon = 1e-15);
    }

    #[test]
    fn improper_prior_rejected() {
        let p = Problem::gaussian(0.0, 1.0, Prior::flat_local(0.3).unwrap()).unwrap();
        assert!(matches!(
            marginal_quadrature(&p, 0.0, 10),
            Err(Error::ImproperPrior(_))
        ));
        let h = Problem::gaussian(0.0, 1.0, Prior::horseshoe_local(1.0).unwrap()).unwrap();
        assert!(evidence(&h, 0.1, 10).is_err());
    }

    #[test]
    fn bernoulli_problem_has_no_known_sigma_path() {
        let fam = Family::bernoulli(0.5).unwrap();
        let p = Problem::exp_family(fam, Prior::cauchy(0.5, 0.1).unwrap());
        assert!(matches!(p.sigma(), Err(Error::Unsupported(_))));
        assert_relative_eq!(p.fisher_information(), 4.0);
        let e = lan_evidence(&p, 400, 2.0).unwrap();
        let c = 1.0 / (PI * 0.1);
        assert_relative_eq!(
            e.bf01,
            bf_expfam_leading(400, 2.0, 4.0, c),
            max_relative = 1e-14
        );
    }

    #[test]
    fn odds_and_losses_enter_cutoff() {
        let p = cauchy_problem().with_odds(2.0, 2.0).unwrap();
        assert_eq!(p.odds_cutoff(), 1.0);
        let p = p
            .with_odds(3.0, 1.0)
            .unwrap()
            .with_losses(1.0, 6.0)
            .unwrap();
        assert_relative_eq!(p.odds_cutoff(), 2.0, epsilon = 1e-15);
        assert!(cauchy_problem().with_odds(0.0, 1.0).is_err());
        assert!(cauchy_problem().with_losses(1.0, -1.0).is_err());
    }

    #[test]
    fn laplace_correction_improves_on_leading_term() {
        let p = cauchy_problem();
        let n = 50;
        let xbar = 0.1;
        let exact = marginal_quadrature(&p, xbar, n).unwrap();
        let lap = laplace_marginal(&p, xbar, n).unwrap();
        let lead = p.prior.density(xbar);
        assert!((lap - exact).abs() < (lead - exact).abs());
    }

    #[test]
    fn expansion_remainder_constant_is_stable() {
        // Fit C(n) = max |BF_quad/BF_lead − 1| / √(log n / n) over the band
        // |t| ≤ √(2 log n). The constant at the smallest n bounds the rest.
        let p = cauchy_problem();
        let fitted: Vec<f64> = [100u64, 1000, 10_000, 100_000]
            .iter()
            .map(|&n| {
                let nf = n as f64;
                let edge = (2.0 * nf.ln()).sqrt();
                let worst = (0..=40)
                    .map(|i| -edge + 2.0 * edge * i as f64 / 40.0)
                    .map(|t| {
                        let e = evidence(&p, t / nf.sqrt(), n).unwrap();
                        (e.bf01 / bf_gaussian_leading(n, t, 1.0, 1.0 / PI) - 1.0).abs()
                    })
                    .fold(0.0, f64::max);
                worst / (nf.ln() / nf).sqrt()
            })
            .collect();
        let c0 = fitted[0];
        assert!(c0 > 0.0 && c0 < 10.0);
        assert!(fitted.iter().all(|&c| c <= c0 * 1.0001), "{fitted:?}");
    }

    proptest! {
        #[test]
        fn quadrature_matches_conjugate_for_any_prior_width(
            log_tau in -4.0..2.0f64,
            mu in -1.0..1.0f64,
            log_n in 0.0..6.0f64,
            t in -6.0..6.0f64,
        ) {
            let (tau, n) = (10f64.powf(log_tau), 10f64.powf(log_n).round() as u64);
            let p = Problem::gaussian(0.0, 1.0, Prior::gaussian(mu, tau).unwrap()).unwrap();
            let xbar = t / (n as f64).sqrt();
            let q = marginal_quadrature(&p, xbar, n).unwrap();
            let c = conjugate_marginal(xbar, n, 1.0, mu, tau);
            prop_assume!(c > 1e-280);
            prop_assert!(((q - c) / c).abs() <= 1e-8, "{q} vs {c}");
        }

        #[test]
        fn bf_decreases_in_abs_t(n in 5u64..5000, t in 0.0..4.0f64, dt in 0.01..1.0f64) {
            let p = cauchy_problem();
            let step = 1.0 / (n as f64).sqrt();
            let a = evidence(&p, t * step, n).unwrap().bf01;
            let b = evidence(&p, (t + dt) * step, n).unwrap().bf01;
            let c = evidence(&p, -(t + dt) * step, n).unwrap().bf01;
            prop_assert!(b < a);
            prop_assert!(c < a);
        }

        #[test]
        fn odds_identity(bf in 1e-6..1e6f64, pi0 in 0.01..0.99f64) {
            let pia = 1.0 - pi0;
            let post = posterior_null(bf, pi0, pia);
            let direct = pi0 * bf / (pi0 * bf + pia);
            prop_assert!((post - direct).abs() <= 1e-14);
            prop_assert!(post > 0.0 && post < 1.0);
        }
    }
}
