//! Priors on the alternative, with the local behaviour at the null that
//! drives the threshold constants.
//!
//! Textual grammar (used by the CLI and config files):
//! `cauchy:loc,scale` | `gaussian:mu,tau` | `student_t:loc,scale,df` |
//! `flat:c_pi` | `horseshoe:scale`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;
use crate::special::norm_sf;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Prior<T> {
    Gaussian {
        mu: T,
        tau: T,
    },
    Cauchy {
        loc: T,
        scale: T,
    },
    StudentT {
        loc: T,
        scale: T,
        df: T,
    },
    /// Improper device that only carries the local density c_π.
    #[serde(rename = "flat")]
    FlatLocal {
        c_pi: T,
    },
    /// Unnormalized log(1 + (scale/θ)²); unbounded at θ = 0.
    #[serde(rename = "horseshoe")]
    HorseshoeLocal {
        scale: T,
    },
}

/// Density and first two derivatives at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Taylor<T> {
    pub pi: T,
    pub pi1: T,
    pub pi2: T,
}

fn positive<T: Scalar>(what: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "{what} must be positive and finite, got {v}"
        )))
    }
}

fn finite<T: Scalar>(what: &str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("{what} must be finite, got {v}")))
    }
}

impl<T: Scalar> Prior<T> {
    pub fn gaussian(mu: T, tau: T) -> Result<Self> {
        finite("mu", mu)?;
        positive("tau", tau)?;
        Ok(Prior::Gaussian { mu, tau })
    }

    pub fn cauchy(loc: T, scale: T) -> Result<Self> {
        finite("loc", loc)?;
        positive("scale", scale)?;
        Ok(Prior::Cauchy { loc, scale })
    }

    pub fn student_t(loc: T, scale: T, df: T) -> Result<Self> {
        finite("loc", loc)?;
        positive("scale", scale)?;
        positive("df", df)?;
        Ok(Prior::StudentT { loc, scale, df })
    }

    pub fn flat_local(c_pi: T) -> Result<Self> {
        positive("c_pi", c_pi)?;
        Ok(Prior::FlatLocal { c_pi })
    }

    pub fn horseshoe_local(scale: T) -> Result<Self> {
        positive("scale", scale)?;
        Ok(Prior::HorseshoeLocal { scale })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Prior::Gaussian { .. } => "gaussian",
            Prior::Cauchy { .. } => "cauchy",
            Prior::StudentT { .. } => "student_t",
            Prior::FlatLocal { .. } => "flat",
            Prior::HorseshoeLocal { .. } => "horseshoe",
        }
    }

    /// Positive, finite density at the null (everything except the horseshoe).
    pub fn is_regular(&self) -> bool {
        !matches!(self, Prior::HorseshoeLocal { .. })
    }

    /// Integrates to one.
    pub fn is_proper(&self) -> bool {
        !matches!(self, Prior::FlatLocal { .. } | Prior::HorseshoeLocal { .. })
    }

    pub fn require_proper(&self) -> Result<()> {
        if self.is_proper() {
            Ok(())
        } else {
            Err(Error::ImproperPrior(self.to_string()))
        }
    }

    /// Location the density is centered on (0 for the location-free kinds).
    pub fn center(&self) -> T {
        match *self {
            Prior::Gaussian { mu, .. } => mu,
            Prior::Cauchy { loc, .. } | Prior::StudentT { loc, .. } => loc,
            _ => T::zero(),
        }
    }

    /// Characteristic width; `None` for the flat device.
    pub fn scale(&self) -> Option<T> {
        match *self {
            Prior::Gaussian { tau, .. } => Some(tau),
            Prior::Cauchy { scale, .. }
            | Prior::StudentT { scale, .. }
            | Prior::HorseshoeLocal { scale } => Some(scale),
            Prior::FlatLocal { .. } => None,
        }
    }

    /// π(θ).
    pub fn density(&self, theta: T) -> T {
        let one = T::one();
        match *self {
            Prior::Gaussian { mu, tau } => {
                let z = (theta - mu) / tau;
                (-T::lit(0.5) * z * z).exp() / (tau * T::TAU().sqrt())
            }
            Prior::Cauchy { loc, scale } => {
                let z = (theta - loc) / scale;
                one / (T::PI() * scale * (one + z * z))
            }
            Prior::StudentT { loc, scale, df } => {
                let z = (theta - loc) / scale;
                let half = T::lit(0.5);
                let log_norm = ((df + one) * half).log_gamma()
                    - (df * half).log_gamma()
                    - half * (df * T::PI()).ln()
                    - scale.ln();
                (log_norm - (df + one) * half * (z * z / df).ln_1p()).exp()
            }
            Prior::FlatLocal { c_pi } => c_pi,
            Prior::HorseshoeLocal { scale } => {
                if theta == T::zero() {
                    T::infinity()
                } else {
                    let r = scale / theta;
                    (r * r).ln_1p()
                }
            }
        }
    }

    /// c_π = π(θ₀).
    pub fn local_density(&self, theta0: T) -> Result<T> {
        match self {
            Prior::HorseshoeLocal { .. } => Err(Error::UnboundedLocalDensity),
            Prior::FlatLocal { c_pi } => Ok(*c_pi),
            _ => Ok(self.density(theta0)),
        }
    }

    /// Density and its first two derivatives at `x`.
    ///
    /// Closed forms for the Gaussian, Cauchy and flat kinds; central
    /// differences for Student-t.
    pub fn taylor_at(&self, x: T) -> Result<Taylor<T>> {
        let one = T::one();
        let two = T::lit(2.0);
        match *self {
            Prior::HorseshoeLocal { .. } => Err(Error::UnboundedLocalDensity),
            Prior::FlatLocal { c_pi } => Ok(Taylor {
                pi: c_pi,
                pi1: T::zero(),
                pi2: T::zero(),
            }),
            Prior::Gaussian { mu, tau } => {
                let pi = self.density(x);
                let z = (x - mu) / tau;
                Ok(Taylor {
                    pi,
                    pi1: -z / tau * pi,
                    pi2: (z * z - one) / (tau * tau) * pi,
                })
            }
            Prior::Cauchy { loc, scale } => {
                let z = (x - loc) / scale;
                let q = one + z * z;
                let k = one / (T::PI() * scale);
                Ok(Taylor {
                    pi: k / q,
                    pi1: -two * z * k / (scale * q * q),
                    pi2: k * (T::lit(6.0) * z * z - two) / (scale * scale * q * q * q),
                })
            }
            Prior::StudentT { .. } => Ok(self.finite_difference_taylor(x)),
        }
    }

    /// Central-difference derivatives. The first derivative uses step
    /// 1e-5·max(1,|x|); the second uses 1e-4·max(1,|x|), which keeps the
    /// rounding error of the three-point stencil below 1e-7.
    pub fn finite_difference_taylor(&self, x: T) -> Taylor<T> {
        let unit = T::one().max(x.abs());
        let h1 = T::lit(1e-5) * unit;
        let h2 = T::lit(1e-4) * unit;
        let f0 = self.density(x);
        let pi1 = (self.density(x + h1) - self.density(x - h1)) / (T::lit(2.0) * h1);
        let pi2 = (self.density(x + h2) - T::lit(2.0) * f0 + self.density(x - h2)) / (h2 * h2);
        Taylor { pi: f0, pi1, pi2 }
    }

    /// Upper bound on the prior mass with |θ − center| > r.
    ///
    /// Exact for Gaussian and Cauchy; Student-t (df ≥ 1) uses the Cauchy
    /// bound. Infinite for the improper kinds.
    pub fn tail_mass_beyond(&self, r: T) -> T {
        let two = T::lit(2.0);
        match *self {
            Prior::Gaussian { tau, .. } => two * norm_sf(r / tau),
            Prior::Cauchy { scale, .. } => T::one() - two / T::PI() * (r / scale).atan(),
            Prior::StudentT { scale, df, .. } if df >= T::one() => {
                T::one() - two / T::PI() * (r / scale).atan()
            }
            Prior::StudentT { .. } => T::one(),
            Prior::FlatLocal { .. } | Prior::HorseshoeLocal { .. } => T::infinity(),
        }
    }
}

impl<T: Scalar> fmt::Display for Prior<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prior::Gaussian { mu, tau } => write!(f, "gaussian:{mu},{tau}"),
            Prior::Cauchy { loc, scale } => write!(f, "cauchy:{loc},{scale}"),
            Prior::StudentT { loc, scale, df } => write!(f, "student_t:{loc},{scale},{df}"),
            Prior::FlatLocal { c_pi } => write!(f, "flat:{c_pi}"),
            Prior::HorseshoeLocal { scale } => write!(f, "horseshoe:{scale}"),
        }
    }
}

impl<T: Scalar> FromStr for Prior<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parse_err = |reason: String| Error::Parse {
            what: "prior",
            input: s.to_string(),
            reason,
        };
        let (kind, args) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| parse_err("expected <kind>:<args>".into()))?;
        let values = args
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map(T::lit)
                    .map_err(|e| parse_err(format!("bad number {v:?}: {e}")))
            })
            .collect::<Result<Vec<T>>>()?;
        let arity = |k: usize| {
            if values.len() == k {
                Ok(())
            } else {
                Err(parse_err(format!(
                    "{kind} takes {k} argument(s), got {}",
                    values.len()
                )))
            }
        };
        let prior = match kind.trim() {
            "gaussian" | "normal" => {
                arity(2)?;
                Prior::gaussian(values[0], values[1])
            }
            "cauchy" => {
                arity(2)?;
                Prior::cauchy(values[0], values[1])
            }
            "student_t" | "t" => {
                arity(3)?;
                Prior::student_t(values[0], values[1], values[2])
            }
            "flat" => {
                arity(1)?;
                Prior::flat_local(values[0])
            }
            "horseshoe" => {
                arity(1)?;
                Prior::horseshoe_local(values[0])
            }
            other => return Err(parse_err(format!("unknown prior kind {other:?}"))),
        };
        prior.map_err(|e| parse_err(e.to_string()))
    }
}
