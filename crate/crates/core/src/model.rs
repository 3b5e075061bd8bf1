//! One-parameter sampling models described through their cumulant
//! generating function ψ(t) = log E[e^{tX}].
//!
//! Everything downstream (rate functions, saddlepoint densities, Fisher
//! information, exact null tails) is derived from ψ and its first three
//! derivatives.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::optimize::{golden_section, newton_bisect};
use crate::scalar::Scalar;
use crate::special::{ln_choose, norm_two_sided};

/// Open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Interval<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self { lo, hi }
    }

    pub fn real_line() -> Self {
        Self {
            lo: T::neg_infinity(),
            hi: T::infinity(),
        }
    }

    pub fn contains(&self, x: T) -> bool {
        x > self.lo && x < self.hi
    }
}

impl<T: Scalar> fmt::Display for Interval<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// User-supplied CGF. The MGF domain must be a finite open interval.
#[derive(Clone)]
pub struct CustomCgf<T> {
    pub name: String,
    pub theta0: T,
    pub domain: Interval<T>,
    psi: [ScalarFn<T>; 4],
}

impl<T> fmt::Debug for CustomCgf<T>
where
    T: fmt::Debug,
{
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CustomCgf")
            .field("name", &self.name)
            .field("theta0", &self.theta0)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

#[derive(Debug, Clone)]
pub enum FamilyKind<T> {
    /// X ~ N(mean, sigma²): ψ(t) = mean·t + σ²t²/2.
    Gaussian {
        mean: T,
        sigma: T,
    },
    /// X ~ Bernoulli(p0): ψ(t) = log(1 − p0 + p0·eᵗ).
    Bernoulli {
        p0: T,
    },
    Custom(CustomCgf<T>),
}

/// A sampling model at its null parameter.
#[derive(Debug, Clone)]
pub struct Family<T> {
    kind: FamilyKind<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateFunctionResult<T> {
    /// I(λ) in nats.
    pub value: T,
    /// Tilt t* with ψ′(t*) = λ.
    pub argmax_t: T,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChernoffBound<T> {
    pub value: T,
    /// The threshold is at or below the mean, so the bound is the trivial 1.
    pub vacuous: bool,
}

impl<T: Scalar> Family<T> {
    pub fn gaussian(mean: T, sigma: T) -> Result<Self> {
        if !(sigma > T::zero()) || !sigma.is_finite() || !mean.is_finite() {
            return Err(invalid(format!(
                "gaussian family needs finite mean and sigma > 0, got ({mean}, {sigma})"
            )));
        }
        Ok(Self {
            kind: FamilyKind::Gaussian { mean, sigma },
        })
    }

    pub fn bernoulli(p0: T) -> Result<Self> {
        if !(p0 > T::zero() && p0 < T::one()) {
            return Err(Error::Domain {
                what: "bernoulli p0",
                value: p0.as_f64(),
                domain: "(0, 1)".into(),
            });
        }
        Ok(Self {
            kind: FamilyKind::Bernoulli { p0 },
        })
    }

    /// A family given by ψ and its first three derivatives on a finite MGF domain.
    #[allow(clippy::too_many_arguments)]
    pub fn custom(
        name: impl Into<String>,
        theta0: T,
        domain: Interval<T>,
        psi: impl Fn(T) -> T + Send + Sync + 'static,
        psi1: impl Fn(T) -> T + Send + Sync + 'static,
        psi2: impl Fn(T) -> T + Send + Sync + 'static,
        psi3: impl Fn(T) -> T + Send + Sync + 'static,
    ) -> Result<Self> {
        if !(domain.lo.is_finite() && domain.hi.is_finite()) || !domain.contains(T::zero()) {
            return Err(invalid(format!(
                "custom MGF domain must be a finite open interval containing 0, got {domain}"
            )));
        }
        if psi(T::zero()).abs() > T::tol(1e-12) {
            return Err(invalid("custom CGF must satisfy psi(0) = 0"));
        }
        Ok(Self {
            kind: FamilyKind::Custom(CustomCgf {
                name: name.into(),
                theta0,
                domain,
                psi: [
                    Arc::new(psi),
                    Arc::new(psi1),
                    Arc::new(psi2),
                    Arc::new(psi3),
                ],
            }),
        })
    }

    pub fn kind(&self) -> &FamilyKind<T> {
        &self.kind
    }

    pub fn name(&self) -> &str {
        match &self.kind {
            FamilyKind::Gaussian { .. } => "gaussian",
            FamilyKind::Bernoulli { .. } => "bernoulli",
            FamilyKind::Custom(c) => &c.name,
        }
    }

    /// Null parameter θ₀ (the null mean for the builtins).
    pub fn theta0(&self) -> T {
        match &self.kind {
            FamilyKind::Gaussian { mean, .. } => *mean,
            FamilyKind::Bernoulli { p0 } => *p0,
            FamilyKind::Custom(c) => c.theta0,
        }
    }

    pub fn mgf_domain(&self) -> Interval<T> {
        match &self.kind {
            FamilyKind::Custom(c) => c.domain,
            _ => Interval::real_line(),
        }
    }

    fn check_t(&self, t: T) -> Result<()> {
        let dom = self.mgf_domain();
        if t.is_nan() || (dom.lo.is_finite() || dom.hi.is_finite()) && !dom.contains(t) {
            return Err(Error::Domain {
                what: "tilt",
                value: t.as_f64(),
                domain: dom.to_string(),
            });
        }
        Ok(())
    }

    fn psi_unchecked(&self, order: usize, t: T) -> T {
        let one = T::one();
        match &self.kind {
            FamilyKind::Gaussian { mean, sigma } => {
                let s2 = *sigma * *sigma;
                match order {
                    0 => *mean * t + T::lit(0.5) * s2 * t * t,
                    1 => *mean + s2 * t,
                    2 => s2,
                    _ => T::zero(),
                }
            }
            FamilyKind::Bernoulli { p0 } => {
                let p = *p0;
                // Tilted success probability, written to avoid overflow for large |t|.
                let q = if t >= T::zero() {
                    one / (one + (one - p) / p * (-t).exp())
                } else {
                    let e = t.exp();
                    p * e / (one - p + p * e)
                };
                match order {
                    0 => {
                        if t > T::zero() {
                            t + (p + (one - p) * (-t).exp()).ln()
                        } else {
                            (p * t.exp_m1()).ln_1p()
                        }
                    }
                    1 => q,
                    2 => q * (one - q),
                    _ => q * (one - q) * (one - T::lit(2.0) * q),
                }
            }
            FamilyKind::Custom(c) => (c.psi[order])(t),
        }
    }

    /// ψ(t).
    pub fn psi(&self, t: T) -> Result<T> {
        self.check_t(t)?;
        Ok(self.psi_unchecked(0, t))
    }

    /// ψ′(t), the tilted mean.
    pub fn psi1(&self, t: T) -> Result<T> {
        self.check_t(t)?;
        Ok(self.psi_unchecked(1, t))
    }

    /// ψ″(t), the tilted variance.
    pub fn psi2(&self, t: T) -> Result<T> {
        self.check_t(t)?;
        Ok(self.psi_unchecked(2, t))
    }

    pub fn psi3(&self, t: T) -> Result<T> {
        self.check_t(t)?;
        Ok(self.psi_unchecked(3, t))
    }

    /// E[X] under the null, ψ′(0).
    pub fn mean(&self) -> T {
        self.psi_unchecked(1, T::zero())
    }

    /// Var[X] under the null, σ² = ψ″(0).
    pub fn variance(&self) -> T {
        self.psi_unchecked(2, T::zero())
    }

    /// Fisher information about the mean parameter at the null, 1/ψ″(0).
    ///
    /// This is the quantity that replaces σ⁻² in the exponential-family
    /// threshold (e.g. 4 for a fair Bernoulli).
    pub fn fisher_information(&self) -> T {
        T::one() / self.variance()
    }

    /// Open range of attainable means {ψ′(t) : t in the MGF domain}.
    pub fn mean_range(&self) -> Interval<T> {
        match &self.kind {
            FamilyKind::Gaussian { .. } => Interval::real_line(),
            FamilyKind::Bernoulli { .. } => Interval::new(T::zero(), T::one()),
            FamilyKind::Custom(c) => {
                Interval::new((c.psi[1])(c.domain.lo), (c.psi[1])(c.domain.hi))
            }
        }
    }

    /// Cramér rate function I(λ) = sup_t {tλ − ψ(t)}, found by solving ψ′(t*) = λ.
    pub fn rate_function(&self, lambda: T) -> Result<RateFunctionResult<T>> {
        let range = self.mean_range();
        if !range.contains(lambda) {
            return Err(Error::Domain {
                what: "rate function argument",
                value: lambda.as_f64(),
                domain: format!("mean range {range}"),
            });
        }
        let mean = self.mean();
        if lambda == mean {
            return Ok(RateFunctionResult {
                value: T::zero(),
                argmax_t: T::zero(),
                converged: true,
            });
        }
        let t_star = self.solve_tilt(lambda)?;
        let value = (t_star * lambda - self.psi_unchecked(0, t_star)).max(T::zero());
        Ok(RateFunctionResult {
            value,
            argmax_t: t_star,
            converged: true,
        })
    }

    fn solve_tilt(&self, lambda: T) -> Result<T> {
        let dom = self.mgf_domain();
        let up = lambda > self.mean();
        let edge = if up { dom.hi } else { dom.lo };
        // Expand away from 0 until ψ′ passes λ.
        let mut far = if up { T::one() } else { -T::one() };
        if edge.is_finite() && !dom.contains(far) {
            far = edge * T::lit(0.5);
        }
        let mut found = false;
        for _ in 0..2000 {
            let v = self.psi_unchecked(1, far);
            if (up && v >= lambda) || (!up && v <= lambda) {
                found = true;
                break;
            }
            far = if edge.is_finite() {
                far + (edge - far) * T::lit(0.5)
            } else {
                far * T::lit(2.0)
            };
            if !far.is_finite() {
                break;
            }
        }
        if !found {
            return Err(Error::Solver {
                residual: (self.psi_unchecked(1, far) - lambda).abs().as_f64(),
            });
        }
        let ftol = T::tol(1e-12);
        newton_bisect(
            |t| self.psi_unchecked(1, t) - lambda,
            |t| self.psi_unchecked(2, t),
            T::zero(),
            far,
            ftol,
        )
        .map_err(|e| match e {
            Error::NoThreshold { .. } => Error::Solver {
                residual: (self.psi_unchecked(1, far) - lambda).abs().as_f64(),
            },
            other => other,
        })
    }

    /// Saddlepoint approximation to the density of the sample mean,
    /// (n / 2πψ″(t*))^{1/2} · exp(−n·I(θ̂)).
    pub fn saddlepoint_density(&self, n: u64, theta_hat: T) -> Result<T> {
        if n == 0 {
            return Err(invalid("saddlepoint density needs n >= 1"));
        }
        let rate = self.rate_function(theta_hat)?;
        let nn = T::count(n);
        let curvature = self.psi_unchecked(2, rate.argmax_t);
        Ok((nn / (T::TAU() * curvature)).sqrt() * (-nn * rate.value).exp())
    }

    /// Exact P(|X̄ₙ − θ₀| > λ) under the null, when the family has a closed form.
    pub fn exact_tail(&self, n: u64, lambda: T) -> Option<T> {
        if n == 0 || lambda < T::zero() {
            return None;
        }
        match &self.kind {
            FamilyKind::Gaussian { sigma, .. } => {
                Some(norm_two_sided(T::count(n).sqrt() * lambda / *sigma))
            }
            FamilyKind::Bernoulli { p0 } => Some(T::lit(binomial_two_sided_tail(
                n,
                p0.as_f64(),
                lambda.as_f64(),
            ))),
            FamilyKind::Custom(_) => None,
        }
    }

    /// log f(x) for the one-observation law, used by the Chernoff information.
    pub fn log_density(&self, x: T) -> Result<T> {
        match &self.kind {
            FamilyKind::Gaussian { mean, sigma } => {
                let z = (x - *mean) / *sigma;
                Ok(crate::special::norm_ln_pdf(z) - sigma.ln())
            }
            FamilyKind::Bernoulli { p0 } => {
                if x == T::one() {
                    Ok(p0.ln())
                } else if x == T::zero() {
                    Ok((T::one() - *p0).ln())
                } else {
                    Ok(T::neg_infinity())
                }
            }
            FamilyKind::Custom(c) => Err(Error::Unsupported(format!(
                "family {} has no density, only a CGF",
                c.name
            ))),
        }
    }
}

/// True when a realized mean counts as a deviation beyond `lambda`.
///
/// Shared by the exact lattice sum and the Monte Carlo estimator so both
/// classify boundary lattice points identically.
#[inline]
pub(crate) fn deviation_exceeds(xbar: f64, center: f64, lambda: f64) -> bool {
    (xbar - center).abs() > lambda
}

/// Exact P(|X/n − p| > λ) for X ~ Bin(n, p), summed in log space.
pub fn binomial_two_sided_tail(n: u64, p: f64, lambda: f64) -> f64 {
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let nf = n as f64;
    let mut total = 0.0;
    for k in 0..=n {
        if deviation_exceeds(k as f64 / nf, p, lambda) {
            let kf = k as f64;
            total += (ln_choose(n, k) + kf * lp + (nf - kf) * lq).exp();
        }
    }
    total.min(1.0)
}

/// Exact P(X ≥ k) for X ~ Bin(n, p).
pub fn binomial_upper_tail(n: u64, p: f64, k: u64) -> f64 {
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let nf = n as f64;
    (k..=n)
        .map(|j| {
            let jf = j as f64;
            (ln_choose(n, j) + jf * lp + (nf - jf) * lq).exp()
        })
        .sum::<f64>()
        .min(1.0)
}

/// Chernoff bound inf_{t≥0} e^{−tc}((1−p₀) + p₀eᵗ)ⁿ on P(X ≥ c), X ~ Bin(n, p₀),
/// found by golden-section search on the log objective.
pub fn chernoff_bound_binomial<T: Scalar>(n: u64, p0: T, c: T) -> Result<ChernoffBound<T>> {
    let family = Family::bernoulli(p0)?;
    let nn = T::count(n);
    if n == 0 || c < T::zero() || c > nn {
        return Err(Error::Domain {
            what: "chernoff threshold",
            value: c.as_f64(),
            domain: format!("[0, {n}]"),
        });
    }
    if c / nn <= p0 {
        return Ok(ChernoffBound {
            value: T::one(),
            vacuous: true,
        });
    }
    if c == nn {
        // Objective decreases forever; the infimum is the t → ∞ limit p0ⁿ.
        return Ok(ChernoffBound {
            value: (nn * p0.ln()).exp(),
            vacuous: false,
        });
    }
    let log_obj = |t: T| -t * c + nn * family.psi_unchecked(0, t);
    let slope = |t: T| -c + nn * family.psi_unchecked(1, t);
    let mut hi = T::one();
    while slope(hi) <= T::zero() {
        hi = hi * T::lit(2.0);
        if !hi.is_finite() {
            return Err(Error::Solver {
                residual: slope(hi).as_f64(),
            });
        }
    }
    let xtol = T::epsilon().sqrt() * hi;
    let m = golden_section(log_obj, T::zero(), hi, xtol);
    Ok(ChernoffBound {
        value: m.value.exp().min(T::one()),
        vacuous: false,
    })
}
