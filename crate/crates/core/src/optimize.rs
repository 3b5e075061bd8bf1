//! One-dimensional minimization and root finding.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<T> {
    pub x: T,
    pub value: T,
}

/// Golden-section search for a minimum of `f` on `[a, b]`.
///
/// Stops once the bracket is narrower than `xtol` (or stops shrinking in
/// the working precision). For a unimodal `f` this is the minimizer; for
/// anything else it is some local minimum inside the bracket.
pub fn golden_section<T, F>(f: F, a: T, b: T, xtol: T) -> Minimum<T>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..400 {
        if hi - lo <= xtol {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        if !(x1 < x2) {
            break;
        }
    }
    // Endpoints are never probed by the interior iteration; compare them too
    // so monotone functions report the boundary.
    let mut best = if f1 <= f2 {
        Minimum { x: x1, value: f1 }
    } else {
        Minimum { x: x2, value: f2 }
    };
    for x in [a, b] {
        let v = f(x);
        if v < best.value {
            best = Minimum { x, value: v };
        }
    }
    best
}

/// Bisection for a root of `f` on `[lo, hi]`, which must bracket a sign change.
pub fn bisect<T, F>(f: F, lo: T, hi: T, xtol: T) -> Result<T>
where
    T: Scalar,
    F: Fn(T) -> T,
{
    let (mut a, mut b) = (lo, hi);
    let mut fa = f(a);
    let fb = f(b);
    if fa == T::zero() {
        return Ok(a);
    }
    if fb == T::zero() {
        return Ok(b);
    }
    if fa.signum() == fb.signum() || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoThreshold {
            lo: lo.as_f64(),
            hi: hi.as_f64(),
        });
    }
    for _ in 0..500 {
        let mid = T::lit(0.5) * (a + b);
        if (b - a).abs() <= xtol || mid == a || mid == b {
            return Ok(mid);
        }
        let fm = f(mid);
        if fm == T::zero() {
            return Ok(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Ok(T::lit(0.5) * (a + b))
}

/// Safeguarded Newton iteration: Newton steps that leave the current
/// bracket are replaced by bisection. Converges when `|f(x)| <= ftol`.
pub fn newton_bisect<T, F, D>(f: F, df: D, lo: T, hi: T, ftol: T) -> Result<T>
where
    T: Scalar,
    F: Fn(T) -> T,
    D: Fn(T) -> T,
{
    let (mut a, mut b) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let fa = f(a);
    let fb = f(b);
    if fa.abs() <= ftol {
        return Ok(a);
    }
    if fb.abs() <= ftol {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoThreshold {
            lo: a.as_f64(),
            hi: b.as_f64(),
        });
    }
    let rising = fa < T::zero();
    let mut x = T::lit(0.5) * (a + b);
    let mut fx = f(x);
    for _ in 0..300 {
        if fx.abs() <= ftol {
            return Ok(x);
        }
        if (fx < T::zero()) == rising {
            a = x;
        } else {
            b = x;
        }
        let d = df(x);
        let newton = x - fx / d;
        let next = if d != T::zero() && newton > a && newton < b {
            newton
        } else {
            T::lit(0.5) * (a + b)
        };
        if next == x {
            break;
        }
        x = next;
        fx = f(x);
    }
    if fx.abs() <= ftol {
        Ok(x)
    } else {
        Err(Error::Solver {
            residual: fx.abs().as_f64(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn golden_finds_parabola_vertex() {
        let m = golden_section(|x: f64| (x - 0.3).powi(2) + 1.0, -2.0, 5.0, 1e-10);
        assert!((m.x - 0.3).abs() < 1e-7);
        assert_relative_eq!(m.value, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn golden_reports_boundary_for_monotone() {
        let m = golden_section(|x: f64| x, 0.0, 1.0, 1e-9);
        assert_eq!(m.x, 0.0);
    }

    #[test]
    fn bisect_sqrt2() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert_relative_eq!(r, 2.0_f64.sqrt(), epsilon = 1e-13);
        assert!(matches!(
            bisect(|x: f64| x * x + 1.0, -1.0, 1.0, 1e-10),
            Err(Error::NoThreshold { .. })
        ));
    }

    #[test]
    fn newton_bisect_survives_bad_derivative() {
        // atan has tiny derivative far out; Newton alone overshoots.
        let r = newton_bisect(
            |x: f64| x.atan() - 1.0,
            |x| 1.0 / (1.0 + x * x),
            -50.0,
            50.0,
            1e-14,
        )
        .unwrap();
        assert_relative_eq!(r, 1.0_f64.tan(), epsilon = 1e-12);
    }
}
