//! Integrated Bayes risk of the two-sided test |t| > c, error exponents for
//! simple-vs-simple testing, and the bivariate-normal scoring risk.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::evidence::Problem;
use crate::model::{Family, FamilyKind};
use crate::optimize::golden_section;
use crate::quad::{feature_breaks, Quadrature};
use crate::rng::{shards, stream_rng};
use crate::scalar::Scalar;
use crate::special::{norm_cdf, norm_log_sf, norm_pdf, norm_sf, norm_two_sided};

/// R(c) = π₀L₀α(c) + π_aL₁β(c) sampled on a grid of cutoffs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Curve<T> {
    pub n: u64,
    pub grid: Vec<T>,
    pub alpha: Vec<T>,
    pub beta: Vec<T>,
    pub total: Vec<T>,
    pub c_star: T,
    pub r_star: T,
}

// Half-width of the standardized-θ window beyond ±c. The acceptance
// probability Φ(c − v) − Φ(−c − v) is below 1e-38 outside it.
const V_PAD: f64 = 13.0;

/// Evenly spaced cutoffs on [0, √(6 log n)].
pub fn default_grid<T: Scalar>(n: u64, points: usize) -> Vec<T> {
    let top = (T::lit(6.0) * T::count(n.max(2)).ln()).sqrt();
    let steps = points.max(2) - 1;
    (0..=steps)
        .map(|i| top * T::count(i as u64) / T::count(steps as u64))
        .collect()
}

/// Type I error of |t| > c: 2(1 − Φ(c)).
pub fn alpha_at<T: Scalar>(c: T) -> T {
    norm_two_sided(c)
}

/// Type II error integrated over the prior, ∫ P_θ(|t| ≤ c) π(θ) dθ.
pub fn beta_at<T: Scalar>(problem: &Problem<T>, n: u64, c: T) -> Result<T> {
    problem.prior.require_proper()?;
    let sigma = problem.sigma()?;
    let step = sigma / T::count(n).sqrt();
    let prior = problem.prior;
    let theta0 = problem.theta0;
    // v = √n(θ − θ₀)/σ.
    let integrand = |v: T| {
        let accept = norm_cdf(c - v) - norm_cdf(-c - v);
        accept * prior.density(theta0 + step * v) * step
    };
    let edge = c + T::lit(V_PAD);
    let vc = (prior.center() - theta0) / step;
    let mut points = feature_breaks(
        -edge,
        edge,
        vc,
        prior.scale().map_or(T::zero(), |s| s / step),
    );
    points.extend([-c, T::zero(), c]);
    points.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    let q = Quadrature::relative(1e-10).with_abs_tol(1e-15);
    Ok(q.integrate_with_breaks(integrand, &points)?
        .value
        .max(T::zero())
        .min(T::one()))
}

/// Loss-weighted risk at one cutoff.
pub fn risk_at<T: Scalar>(problem: &Problem<T>, n: u64, c: T) -> Result<T> {
    let w0 = problem.pi0 * problem.loss0;
    let w1 = problem.pia * problem.loss1;
    Ok(w0 * alpha_at(c) + w1 * beta_at(problem, n, c)?)
}

/// Risk on `grid`, with the minimizer refined by golden section between the
/// grid neighbours of the best grid point.
pub fn risk_curve<T: Scalar>(problem: &Problem<T>, n: u64, grid: &[T]) -> Result<Curve<T>> {
    if n == 0 {
        return Err(invalid("risk curve needs n >= 1"));
    }
    if grid.len() < 3 {
        return Err(invalid("risk grid needs at least three points"));
    }
    if grid.iter().any(|c| !(c.is_finite() && *c >= T::zero()))
        || grid.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(invalid(
            "risk grid must be finite, non-negative and strictly increasing",
        ));
    }
    let w0 = problem.pi0 * problem.loss0;
    let w1 = problem.pia * problem.loss1;
    let alpha: Vec<T> = grid.iter().map(|&c| alpha_at(c)).collect();
    let beta = grid
        .iter()
        .map(|&c| beta_at(problem, n, c))
        .collect::<Result<Vec<T>>>()?;
    let total: Vec<T> = alpha
        .iter()
        .zip(&beta)
        .map(|(&a, &b)| w0 * a + w1 * b)
        .collect();

    let best = total
        .iter()
        .enumerate()
        .fold(0, |bi, (i, v)| if *v < total[bi] { i } else { bi });
    let lo = grid[best.saturating_sub(1)];
    let hi = grid[(best + 1).min(grid.len() - 1)];
    // Quadrature failures inside the search surface as NaN and lose every comparison.
    let objective = |c: T| risk_at(problem, n, c).unwrap_or(T::nan());
    let m = golden_section(objective, lo, hi, T::tol(1e-7));
    let (c_star, r_star) = if m.value <= total[best] {
        (m.x, m.value)
    } else {
        (grid[best], total[best])
    };
    Ok(Curve {
        n,
        grid: grid.to_vec(),
        alpha,
        beta,
        total,
        c_star,
        r_star,
    })
}

/// c* for each n, computed in parallel on [`default_grid`] with `points` nodes.
pub fn risk_optimal_boundary<T: Scalar>(
    problem: &Problem<T>,
    ns: &[u64],
    points: usize,
) -> Result<Vec<(u64, T)>> {
    ns.par_iter()
        .map(|&n| risk_curve(problem, n, &default_grid(n, points)).map(|c| (n, c.c_star)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernoffResult<T> {
    /// −min_s log ∫ f₀^{1−s} f₁^s, in nats.
    pub d_c: T,
    pub s_star: T,
    /// Efron–Truax approximation of the Bayes error, when a prefactor is known.
    pub prefactor_error: Option<T>,
    pub exact_error: Option<T>,
}

/// Chernoff information between two builtin families of the same kind.
///
/// Gaussian pairs integrate over the real line; Bernoulli pairs sum over
/// {0, 1}. Only the exponent is reported, no error prefactor.
pub fn chernoff_information(f0: &Family<f64>, f1: &Family<f64>) -> Result<ChernoffResult<f64>> {
    let log_affinity: Box<dyn Fn(f64) -> f64 + Sync> = match (f0.kind(), f1.kind()) {
        (
            FamilyKind::Gaussian {
                mean: m0,
                sigma: s0,
            },
            FamilyKind::Gaussian {
                mean: m1,
                sigma: s1,
            },
        ) => {
            let (m0, m1, s0, s1) = (*m0, *m1, *s0, *s1);
            let width = 40.0 * s0.max(s1);
            let mut points = vec![m0.min(m1) - width, m0, m1, m0.max(m1) + width];
            points.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
            let (g0, g1) = (f0.clone(), f1.clone());
            Box::new(move |s: f64| {
                let q = Quadrature::relative(1e-13);
                let f = |x: f64| {
                    let l0 = g0.log_density(x).unwrap_or(f64::NEG_INFINITY);
                    let l1 = g1.log_density(x).unwrap_or(f64::NEG_INFINITY);
                    ((1.0 - s) * l0 + s * l1).exp()
                };
                q.integrate_with_breaks(f, &points)
                    .map(|r| r.value.ln())
                    .unwrap_or(f64::NAN)
            })
        }
        (FamilyKind::Bernoulli { p0 }, FamilyKind::Bernoulli { p0: p1 }) => {
            let (a, b) = (*p0, *p1);
            Box::new(move |s: f64| {
                let one = (1.0 - s) * a.ln() + s * b.ln();
                let zero = (1.0 - s) * (-a).ln_1p() + s * (-b).ln_1p();
                let m = one.max(zero);
                m + ((one - m).exp() + (zero - m).exp()).ln()
            })
        }
        _ => {
            return Err(Error::Unsupported(format!(
                "chernoff information for {} vs {}",
                f0.name(),
                f1.name()
            )))
        }
    };
    let m = golden_section(log_affinity, 0.0, 1.0, 1e-10);
    if !m.value.is_finite() {
        return Err(Error::Domain {
            what: "chernoff affinity",
            value: m.value,
            domain: "finite values".into(),
        });
    }
    Ok(ChernoffResult {
        d_c: (-m.value).max(0.0),
        s_star: m.x,
        prefactor_error: None,
        exact_error: None,
    })
}

/// Gaussian shift pair N(θ₀, σ²) vs N(θ₀ + δ, σ²) under the midpoint rule:
/// prefactor (2σ/(δ√(2πn)))·e^{−nδ²/8σ²} and exact error 1 − Φ(√nδ/2σ).
pub fn efron_truax_error<T: Scalar>(n: u64, delta: T, sigma: T) -> Result<ChernoffResult<T>> {
    if n == 0 || !(delta > T::zero()) || !(sigma > T::zero()) {
        return Err(invalid(format!(
            "need n >= 1, delta > 0, sigma > 0; got ({n}, {delta}, {sigma})"
        )));
    }
    let nn = T::count(n);
    let r = delta / sigma;
    let d_c = r * r / T::lit(8.0);
    let prefactor = T::lit(2.0) / (r * (T::TAU() * nn).sqrt()) * (-nn * d_c).exp();
    let exact = norm_sf(nn.sqrt() * r / T::lit(2.0));
    Ok(ChernoffResult {
        d_c,
        s_star: T::lit(0.5),
        prefactor_error: Some(prefactor),
        exact_error: Some(exact),
    })
}

/// Logs of the two error values of [`efron_truax_error`], computed without
/// underflow for large n.
pub fn efron_truax_log_error<T: Scalar>(n: u64, delta: T, sigma: T) -> Result<(T, T)> {
    efron_truax_error(n, delta, sigma)?;
    let nn = T::count(n);
    let r = delta / sigma;
    let log_prefactor =
        (T::lit(2.0) / (r * (T::TAU() * nn).sqrt())).ln() - nn * r * r / T::lit(8.0);
    Ok((log_prefactor, norm_log_sf(nn.sqrt() * r / T::lit(2.0))))
}

/// Inputs of the conjugate-normal scoring risk.
///
/// (mu_t, tau_t) is the prior that defines the decision rule and (mu_s,
/// tau_s) the prior the rule is scored under. The rule's cutoff on x̄ is
/// passed explicitly, so (mu_t, tau_t) only feed [`ScoringSetup::posterior`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoringSetup<T> {
    pub n: u64,
    pub sigma: T,
    pub tau_t: T,
    pub mu_t: T,
    pub tau_s: T,
    pub mu_s: T,
    pub theta0: T,
    pub loss0: T,
    pub loss1: T,
    pub cutoff: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScoringRisk<T> {
    pub rho: T,
    pub a: T,
    pub b: T,
    /// P{U > a, V < b}.
    pub p_upper_lower: T,
    /// P{U < a, V > b}.
    pub p_lower_upper: T,
    pub risk: T,
}

impl<T: Scalar> ScoringSetup<T> {
    /// Posterior mean and variance of θ under the N(mu_t, tau_t²) prior.
    pub fn posterior(&self, xbar: T) -> (T, T) {
        let prec =
            T::count(self.n) / (self.sigma * self.sigma) + T::one() / (self.tau_t * self.tau_t);
        let var = T::one() / prec;
        let mean = var
            * (T::count(self.n) * xbar / (self.sigma * self.sigma)
                + self.mu_t / (self.tau_t * self.tau_t));
        (mean, var)
    }

    /// ρ = (1 + σ²/(nτ_s²))^{−1/2}.
    pub fn rho(&self) -> T {
        (T::one() + self.sigma * self.sigma / (T::count(self.n) * self.tau_s * self.tau_s))
            .sqrt()
            .recip()
    }
}

/// L₀·P{U > a, V < b} + L₁·P{U < a, V > b}.
pub fn scoring_risk<T: Scalar>(setup: &ScoringSetup<T>) -> Result<ScoringRisk<T>> {
    let s = setup;
    for (what, v) in [
        ("sigma", s.sigma),
        ("tau_t", s.tau_t),
        ("tau_s", s.tau_s),
        ("loss0", s.loss0),
        ("loss1", s.loss1),
    ] {
        if !(v > T::zero() && v.is_finite()) {
            return Err(invalid(format!("{what} must be positive, got {v}")));
        }
    }
    if s.n == 0 {
        return Err(invalid("scoring risk needs n >= 1"));
    }
    let rho = s.rho();
    let a = (s.theta0 - s.mu_s) / s.tau_s;
    let b = rho * (s.cutoff - s.mu_s) / s.tau_s;
    let (p_ul, p_lu) = orthant_probabilities(a, b, rho)?;
    Ok(ScoringRisk {
        rho,
        a,
        b,
        p_upper_lower: p_ul,
        p_lower_upper: p_lu,
        risk: s.loss0 * p_ul + s.loss1 * p_lu,
    })
}

/// (P{U > a, V < b}, P{U < a, V > b}) for a standard bivariate normal with
/// correlation ρ, each as ∫ φ(u)·Φ(±(b − ρu)/√(1−ρ²)) du.
pub fn orthant_probabilities<T: Scalar>(a: T, b: T, rho: T) -> Result<(T, T)> {
    if !(rho.abs() < T::one() - T::lit(1e-12)) {
        return Err(Error::DegenerateCorrelation(rho.as_f64()));
    }
    let r = (T::one() - rho * rho).sqrt();
    let reach = T::lit(40.0);
    let q = Quadrature::relative(1e-12).with_abs_tol(1e-13);
    // The conditional CDF steps from 0 to 1 around u = b/ρ over a width of
    // about √(1−ρ²)/|ρ|, which can sit just outside [lo, hi] and still carry mass.
    let breaks = |lo: T, hi: T| {
        if rho == T::zero() {
            vec![lo, hi]
        } else {
            feature_breaks(lo, hi, b / rho, r / rho.abs())
        }
    };
    let upper = if a < reach {
        let lo = a.max(-reach);
        q.integrate_with_breaks(
            |u: T| norm_pdf(u) * norm_cdf((b - rho * u) / r),
            &breaks(lo, reach),
        )?
        .value
    } else {
        T::zero()
    };
    let lower = if a > -reach {
        let hi = a.min(reach);
        q.integrate_with_breaks(
            |u: T| norm_pdf(u) * norm_sf((b - rho * u) / r),
            &breaks(-reach, hi),
        )?
        .value
    } else {
        T::zero()
    };
    Ok((
        upper.max(T::zero()).min(T::one()),
        lower.max(T::zero()).min(T::one()),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrthantEstimate {
    pub p_upper_lower: f64,
    pub se_upper_lower: f64,
    pub p_lower_upper: f64,
    pub se_lower_upper: f64,
}

/// Monte Carlo estimate of [`orthant_probabilities`], sharded like the tail
/// estimator so the result depends only on (seed, reps).
pub fn orthant_probabilities_mc(
    a: f64,
    b: f64,
    rho: f64,
    reps: u64,
    seed: u64,
) -> Result<OrthantEstimate> {
    if !(rho.abs() < 1.0) || reps == 0 {
        return Err(invalid(format!(
            "need |rho| < 1 and reps > 0, got ({rho}, {reps})"
        )));
    }
    let r = (1.0 - rho * rho).sqrt();
    let (ul, lu) = shards(reps)
        .into_par_iter()
        .map(|(stream, count)| {
            let mut rng = stream_rng(seed, stream);
            let (mut ul, mut lu) = (0u64, 0u64);
            for _ in 0..count {
                let z1: f64 = rng.sample(StandardNormal);
                let z2: f64 = rng.sample(StandardNormal);
                let v = rho * z1 + r * z2;
                if z1 > a && v < b {
                    ul += 1;
                } else if z1 < a && v > b {
                    lu += 1;
                }
            }
            (ul, lu)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    let n = reps as f64;
    let p1 = ul as f64 / n;
    let p2 = lu as f64 / n;
    Ok(OrthantEstimate {
        p_upper_lower: p1,
        se_upper_lower: (p1 * (1.0 - p1) / n).sqrt(),
        p_lower_upper: p2,
        se_lower_upper: (p2 * (1.0 - p2) / n).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::priors::Prior;
    use crate::thresholds::{gaussian_threshold, numeric_threshold};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn problem(prior: Prior<f64>) -> Problem<f64> {
        Problem::gaussian(0.0, 1.0, prior).unwrap()
    }

    #[test]
    fn zero_cutoff_always_rejects() {
        let p = problem(Prior::cauchy(0.0, 1.0).unwrap());
        let curve = risk_curve(&p, 100, &default_grid(100, 40)).unwrap();
        assert_eq!(curve.alpha[0], 1.0);
        assert!(curve.beta[0] < 1e-15);
        assert_relative_eq!(curve.total[0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn large_cutoff_is_mostly_type_two() {
        let p = problem(Prior::cauchy(0.0, 1.0).unwrap());
        let a = alpha_at(6.0_f64);
        assert!((a - 1.973e-9).abs() < 1e-12);
        let r = risk_at(&p, 100, 6.0).unwrap();
        let b = beta_at(&p, 100, 6.0).unwrap();
        assert!(((r - 0.5 * b) / r).abs() < 1e-7);
        // Cauchy mass within |θ| ≲ 0.6 accepted with high probability.
        assert!(b > 0.3 && b < 0.4, "{b}");
    }

    #[test]
    fn beta_matches_conjugate_closed_form() {
        // Under a N(0, τ²) prior t is marginally N(0, 1 + nτ²).
        for &(n, tau, c) in &[(10u64, 1.0, 1.5), (1000, 0.3, 2.5), (100_000, 2.0, 3.0)] {
            let p = problem(Prior::gaussian(0.0, tau).unwrap());
            let sd = (1.0 + n as f64 * tau * tau).sqrt();
            let want = 1.0 - norm_two_sided(c / sd);
            assert_relative_eq!(beta_at(&p, n, c).unwrap(), want, max_relative = 1e-8);
        }
    }

    #[test]
    fn curve_shapes() {
        for prior in [
            Prior::gaussian(0.0, 1.0).unwrap(),
            Prior::cauchy(0.0, 1.0).unwrap(),
            Prior::student_t(0.0, 1.0, 3.0).unwrap(),
        ] {
            for &n in &[100u64, 1000, 10_000] {
                let c = risk_curve(&problem(prior), n, &default_grid(n, 60)).unwrap();
                assert!(c.alpha.windows(2).all(|w| w[1] < w[0]));
                assert!(c.beta.windows(2).all(|w| w[1] > w[0]));
                assert!(c.total.iter().all(|&v| v >= c.r_star - 1e-15));
                // Single valley: differences change sign once.
                let signs: Vec<bool> = c.total.windows(2).map(|w| w[1] < w[0]).collect();
                let flips = signs.windows(2).filter(|w| w[0] != w[1]).count();
                assert_eq!(flips, 1, "{prior} n={n}");
            }
        }
    }

    #[test]
    fn gaussian_prior_minimizer_near_asymptotic_constant() {
        let p = problem(Prior::gaussian(0.0, 1.0).unwrap());
        let c = risk_curve(&p, 100, &default_grid(100, 80)).unwrap();
        let k = gaussian_threshold(
            100,
            1.0,
            (2.0 * std::f64::consts::PI).sqrt().recip(),
            0.5,
            0.5,
        )
        .unwrap()
        .constant();
        assert!((c.c_star.powi(2) - 100f64.ln() - k).abs() <= 1.5);
    }

    #[test]
    fn minimizer_is_bayes_boundary() {
        let p = problem(Prior::cauchy(0.0, 1.0).unwrap());
        let ns = [1000u64, 8000, 64_000];
        let b = risk_optimal_boundary(&p, &ns, 80).unwrap();
        assert!(b.windows(2).all(|w| w[1].1 > w[0].1));
        for (n, c) in b {
            let root = numeric_threshold(&p, n).unwrap().t_crit.unwrap();
            assert!((c - root).abs() < 0.15, "n={n}: {c} vs {root}");
            assert!((c - root).abs() < 1e-4, "n={n}: {c} vs {root}");
        }
    }

    #[test]
    fn fixed_cutoff_is_suboptimal() {
        let p = problem(Prior::cauchy(0.0, 1.0).unwrap());
        for &n in &[10_000u64, 100_000] {
            let c = risk_curve(&p, n, &default_grid(n, 60)).unwrap();
            assert!(risk_at(&p, n, 1.96).unwrap() - c.r_star > 0.0);
        }
    }

    #[test]
    fn grid_validation() {
        let p = problem(Prior::cauchy(0.0, 1.0).unwrap());
        assert!(risk_curve(&p, 100, &[0.0, 1.0]).is_err());
        assert!(risk_curve(&p, 100, &[0.0, 2.0, 1.0]).is_err());
        assert!(risk_curve(&p, 100, &[-1.0, 0.0, 1.0]).is_err());
        let flat = problem(Prior::flat_local(0.3).unwrap());
        assert!(risk_curve(&flat, 100, &[0.0, 1.0, 2.0]).is_err());
    }

    #[test]
    fn chernoff_gaussian_pair() {
        let f0 = Family::gaussian(0.0, 1.0).unwrap();
        let f1 = Family::gaussian(1.0, 1.0).unwrap();
        let r = chernoff_information(&f0, &f1).unwrap();
        assert!((r.d_c - 0.125).abs() < 1e-9, "{}", r.d_c);
        assert!((r.s_star - 0.5).abs() < 1e-6);
        let f2 = Family::gaussian(0.0, 1.0).unwrap();
        assert!(chernoff_information(&f0, &f2).unwrap().d_c < 1e-12);
    }

    #[test]
    fn chernoff_bernoulli_pair() {
        let r = chernoff_information(
            &Family::bernoulli(0.2).unwrap(),
            &Family::bernoulli(0.8).unwrap(),
        )
        .unwrap();
        // Grid oracle: at s = 1/2 the affinity is 2√(0.16) = 0.8.
        assert_relative_eq!(r.d_c, -(0.8_f64).ln(), epsilon = 1e-12);
        assert!((r.s_star - 0.5).abs() < 1e-6);
        let mixed = chernoff_information(
            &Family::bernoulli(0.2).unwrap(),
            &Family::gaussian(0.0, 1.0).unwrap(),
        );
        assert!(matches!(mixed, Err(Error::Unsupported(_))));
    }

    #[test]
    fn efron_truax_examples() {
        let r = efron_truax_error(100, 1.0_f64, 1.0).unwrap();
        let (pre, exact) = (r.prefactor_error.unwrap(), r.exact_error.unwrap());
        assert!((pre - 2.973e-7).abs() < 1e-10, "{pre}");
        assert_relative_eq!(exact, 2.866515718791939e-7, max_relative = 1e-12);
        assert!((pre / exact - 1.037).abs() < 1e-3);
        let a = efron_truax_error(25, 2.0_f64, 1.0).unwrap();
        assert_relative_eq!(25.0 * a.d_c, 100.0 * r.d_c, epsilon = 1e-14);
        for &n in &[10u64, 1000, 100_000] {
            let (log_pre, _) = efron_truax_log_error(n, 0.7_f64, 1.3).unwrap();
            let nf = n as f64;
            let k = log_pre + nf * 0.49 / (8.0 * 1.69) + 0.5 * nf.ln();
            let k10 = (2.0 * 1.3 / (0.7 * std::f64::consts::TAU.sqrt())).ln();
            assert!((k - k10).abs() < 1e-9);
        }
    }

    #[test]
    fn efron_truax_ratio_band_and_exponent() {
        for &n in &[64u64, 100, 1000, 10_000, 1_000_000] {
            let (lp, le) = efron_truax_log_error(n, 1.0_f64, 1.0).unwrap();
            let ratio = (lp - le).exp();
            assert!((0.9..=1.1).contains(&ratio), "n={n}: {ratio}");
        }
        let rate = |n: u64| -efron_truax_log_error(n, 1.0_f64, 1.0).unwrap().1 / n as f64;
        let gaps: Vec<f64> = [100u64, 1000, 10_000, 100_000]
            .iter()
            .map(|&n| (rate(n) - 0.125).abs())
            .collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
    }

    #[test]
    fn orthant_independence_and_known_value() {
        let (a, b) = (0.3_f64, -0.7_f64);
        let (ul, lu) = orthant_probabilities(a, b, 0.0).unwrap();
        assert_relative_eq!(ul, norm_sf(a) * norm_cdf(b), epsilon = 1e-12);
        assert_relative_eq!(lu, norm_cdf(a) * norm_sf(b), epsilon = 1e-12);
        // P{U>0, V<0} = 1/4 − asin(ρ)/(2π).
        let (p, _) = orthant_probabilities(0.0_f64, 0.0, 0.5).unwrap();
        assert!((p - (0.25 - 0.5_f64.asin() / std::f64::consts::TAU)).abs() < 1e-10);
        assert!((p - 0.1667).abs() < 1e-4);
        assert!(matches!(
            orthant_probabilities(0.0_f64, 0.0, 1.0),
            Err(Error::DegenerateCorrelation(_))
        ));
    }

    #[test]
    fn orthant_matches_monte_carlo() {
        for (i, &(a, b, rho)) in [(0.0, 0.0, 0.5), (0.8, -0.2, 0.95), (-1.2, 0.4, -0.6)]
            .iter()
            .enumerate()
        {
            let (ul, lu) = orthant_probabilities(a, b, rho).unwrap();
            let mc = orthant_probabilities_mc(a, b, rho, 400_000, 5 + i as u64).unwrap();
            assert!((ul - mc.p_upper_lower).abs() < 4.0 * mc.se_upper_lower);
            assert!((lu - mc.p_lower_upper).abs() < 4.0 * mc.se_lower_upper);
        }
    }

    #[test]
    fn scoring_risk_independence_limit() {
        let s = ScoringSetup {
            n: 1,
            sigma: 1e6,
            tau_t: 1.0,
            mu_t: 0.0,
            tau_s: 1.0,
            mu_s: 0.2,
            theta0: 0.0,
            loss0: 2.0,
            loss1: 3.0,
            cutoff: 0.5,
        };
        let r = scoring_risk(&s).unwrap();
        assert!(r.rho < 1e-5);
        let (a, b): (f64, f64) = (r.a, r.b);
        let want = 2.0 * norm_sf(a) * norm_cdf(b) + 3.0 * norm_cdf(a) * norm_sf(b);
        assert!((r.risk - want).abs() < 1e-5);
    }

    #[test]
    fn scoring_risk_symmetry_and_posterior() {
        let s = ScoringSetup {
            n: 50,
            sigma: 1.0,
            tau_t: 2.0,
            mu_t: 0.5,
            tau_s: 0.7,
            mu_s: 0.0,
            theta0: 0.0,
            loss0: 1.0,
            loss1: 1.0,
            cutoff: 0.0,
        };
        let r = scoring_risk(&s).unwrap();
        assert_relative_eq!(r.p_upper_lower, r.p_lower_upper, epsilon = 1e-12);
        let (m, v) = s.posterior(0.3);
        assert_relative_eq!(v, 1.0 / (50.0 + 0.25), epsilon = 1e-15);
        assert_relative_eq!(m, v * (50.0 * 0.3 + 0.5 / 4.0), epsilon = 1e-15);
        let bad = ScoringSetup { tau_s: 0.0, ..s };
        assert!(scoring_risk(&bad).is_err());
        let degenerate = ScoringSetup {
            n: u64::MAX,
            sigma: 1e-10,
            ..s
        };
        assert!(matches!(
            scoring_risk(&degenerate),
            Err(Error::DegenerateCorrelation(_))
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn orthants_partition(a in -3.0..3.0f64, b in -3.0..3.0f64, rho in -0.99..0.99f64) {
            let (ul, lu) = orthant_probabilities(a, b, rho).unwrap();
            // Add the two remaining orthants via the marginals.
            let uu = norm_sf(a) - ul;
            let ll = norm_cdf(a) - lu;
            prop_assert!((ul + lu + uu + ll - 1.0).abs() < 1e-10);
            prop_assert!(uu >= -1e-12 && ll >= -1e-12);
            prop_assert!((uu + lu - norm_sf(b)).abs() < 1e-10);
        }

        #[test]
        fn orthants_near_degenerate(a in -1.0..1.0f64, d in -0.1..0.1f64, rho in 0.99..0.99999f64, neg: bool) {
            let rho = if neg { -rho } else { rho };
            let b = rho * a + d;
            let (ul, lu) = orthant_probabilities(a, b, rho).unwrap();
            // P{U < a, V > b} − P{U > a, V < b} = Φ(a) − Φ(b).
            prop_assert!((lu - ul - (norm_cdf(a) - norm_cdf(b))).abs() < 1e-10, "{ul} {lu}");
        }

        #[test]
        fn risk_is_probability_weighted(c in 0.0..5.0f64, n in 2u64..100_000) {
            let p = problem(Prior::cauchy(0.0, 1.0).unwrap());
            let b = beta_at(&p, n, c).unwrap();
            prop_assert!((0.0..=1.0).contains(&b));
            let r = risk_at(&p, n, c).unwrap();
            prop_assert!((0.0..=1.0).contains(&r));
        }
    }
}
