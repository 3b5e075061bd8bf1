//! Bayes-risk-optimal rejection thresholds for point-null tests.
//!
//! For a point null H₀: θ = θ₀ and a prior π on the alternative, the
//! cutoff that minimizes integrated Bayes risk grows like
//! t² = log n + log(c_π⁻²) − log(2πσ²) + 2 log(π₀/π_a), which puts the
//! rejection boundary on the moderate deviation scale √(log n / n).
//! This crate computes that cutoff, the exact finite-n boundary, and the
//! tail, risk and error-exponent quantities used to check it.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the scalar for the common case. Monte Carlo routines run in
//! `f64`.
//!
//! ```
//! use mdthresh::{PriorSpec, TestProblem};
//!
//! let prior = PriorSpec::cauchy(0.0, 1.0).unwrap();
//! let problem = TestProblem::gaussian(0.0, 1.0, prior).unwrap();
//! let t = problem.asymptotic_threshold(1000).unwrap().t_crit.unwrap();
//! assert!((t - 2.71).abs() < 0.01);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod calibration;
pub mod error;
pub mod evidence;
pub mod lab;
pub mod model;
pub mod optimize;
pub mod priors;
pub mod quad;
pub mod risk;
pub mod rng;
pub mod scalar;
pub mod special;
pub mod tails;
pub mod thresholds;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type ModelFamily = model::Family<f64>;
pub type PriorSpec = priors::Prior<f64>;
pub type TestProblem = evidence::Problem<f64>;
pub type EvidenceResult = evidence::Evidence<f64>;
pub type ThresholdResult = thresholds::Threshold<f64>;
pub type RiskCurve = risk::Curve<f64>;
pub type ChernoffReport = risk::ChernoffResult<f64>;
pub type TailValue = tails::TailEstimate<f64>;

pub type ModelFamilyF32 = model::Family<f32>;
pub type PriorSpecF32 = priors::Prior<f32>;
pub type TestProblemF32 = evidence::Problem<f32>;
pub type ThresholdResultF32 = thresholds::Threshold<f32>;
pub type RiskCurveF32 = risk::Curve<f32>;
