//! Cutoff comparison across calibration schemes and the Lindley
//! demonstration at a single (n, t).

use serde::Serialize;

use crate::error::{invalid, Result};
use crate::evidence::{bf_gaussian_leading, evidence, Problem};
use crate::scalar::Scalar;
use crate::special::{norm_quantile, norm_two_sided};

/// One line of the calibration table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CalibrationRow<T> {
    pub n: u64,
    /// Risk-optimal cutoff from the asymptotic threshold.
    pub t_rs: T,
    /// Fixed-level cutoff z_{1−α/2}.
    pub t_np: T,
    /// E-value cutoff √(2 log(1/α)).
    pub t_ev: T,
    /// Two-sided p-value at t_rs.
    pub p_at_rs: T,
}

/// z_{1−α/2}.
pub fn fixed_level_cutoff<T: Scalar>(alpha: T) -> T {
    norm_quantile(T::one() - alpha / T::lit(2.0))
}

/// √(2 log(1/α)), the cutoff implied by rejecting when an e-value exceeds 1/α.
pub fn e_value_cutoff<T: Scalar>(alpha: T) -> T {
    (T::lit(2.0) * alpha.recip().ln()).sqrt()
}

pub fn calibration_table<T: Scalar>(
    problem: &Problem<T>,
    ns: &[u64],
    alpha: T,
) -> Result<Vec<CalibrationRow<T>>> {
    if !(alpha > T::zero() && alpha < T::one()) {
        return Err(invalid(format!("alpha must be in (0, 1), got {alpha}")));
    }
    let t_np = fixed_level_cutoff(alpha);
    let t_ev = e_value_cutoff(alpha);
    ns.iter()
        .map(|&n| {
            let th = problem.asymptotic_threshold(n)?;
            let t_rs = th.t_crit.ok_or_else(|| {
                invalid(format!(
                    "threshold is undefined at n = {n} (t² = {})",
                    th.t_crit_sq
                ))
            })?;
            Ok(CalibrationRow {
                n,
                t_rs,
                t_np,
                t_ev,
                p_at_rs: norm_two_sided(t_rs),
            })
        })
        .collect()
}

/// Rounds half away from zero to `places` decimals.
pub fn round_to(x: f64, places: i32) -> f64 {
    let k = 10f64.powi(places);
    (x * k).round() / k
}

/// Table-style p-value: three decimals, or one significant figure below 0.001.
pub fn display_p(p: f64) -> String {
    if p >= 0.001 || p == 0.0 {
        format!("{:.3}", round_to(p, 3))
    } else {
        let places = (-p.log10()).ceil() as usize;
        let rounded = round_to(p, places as i32);
        // Rounding can carry into the next decade (0.00096 → 0.001).
        if rounded >= 10f64.powi(-(places as i32) + 1) {
            format!("{:.*}", places - 1, rounded)
        } else {
            format!("{:.*}", places, rounded)
        }
    }
}

/// Table-style row: cutoff to two decimals, p-value from the displayed cutoff.
pub fn parity_row(row: &CalibrationRow<f64>) -> (String, String) {
    let t = round_to(row.t_rs, 2);
    (format!("{t:.2}"), display_p(norm_two_sided(t)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// |t| < t_crit: the data favour the null under the Bayes rule.
    BelowBoundary,
    AboveBoundary,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::BelowBoundary => "below boundary",
            Verdict::AboveBoundary => "above boundary",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LindleyReport<T> {
    pub n: u64,
    pub t: T,
    /// Bayes factor from the quadrature marginal.
    pub bf01: T,
    /// Leading-order Bayes factor.
    pub bf01_leading: T,
    pub post_h0: T,
    /// Asymptotic cutoff.
    pub t_crit: T,
    /// Classical two-sided p-value at t.
    pub p_value: T,
    pub verdict: Verdict,
}

/// Evidence at a standardized statistic t next to the cutoff it is judged by.
pub fn lindley_report<T: Scalar>(problem: &Problem<T>, n: u64, t: T) -> Result<LindleyReport<T>> {
    let th = problem.asymptotic_threshold(n)?;
    let t_crit = th.t_crit.ok_or_else(|| {
        invalid(format!(
            "threshold is undefined at n = {n} (t² = {})",
            th.t_crit_sq
        ))
    })?;
    let ev = evidence(problem, problem.xbar_at(t, n)?, n)?;
    let verdict = if t.abs() < t_crit {
        Verdict::BelowBoundary
    } else {
        Verdict::AboveBoundary
    };
    Ok(LindleyReport {
        n,
        t,
        bf01: ev.bf01,
        bf01_leading: bf_gaussian_leading(n, t, problem.sigma()?, problem.c_pi()?),
        post_h0: ev.post_h0,
        t_crit,
        p_value: norm_two_sided(t),
        verdict,
    })
}
