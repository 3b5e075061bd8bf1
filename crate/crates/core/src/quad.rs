//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
// Gauss weights for the embedded 7-point rule (nodes XGK[1], XGK[3], XGK[5], XGK[7]).
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult<T> {
    pub value: T,
    pub abs_error: T,
    pub evaluations: usize,
}

/// Adaptive integrator settings. The stopping rule is
/// `error <= max(abs_tol, rel_tol * |value|)`.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<T> {
    pub rel_tol: T,
    pub abs_tol: T,
    pub max_intervals: usize,
}

impl<T: Scalar> Default for Quadrature<T> {
    fn default() -> Self {
        Self::relative(1e-10)
    }
}

#[derive(Clone, Copy)]
struct Segment<T> {
    a: T,
    b: T,
    value: T,
    error: T,
}

fn gk15<T: Scalar, F: Fn(T) -> T>(f: &F, a: T, b: T) -> Segment<T> {
    let half = T::lit(0.5);
    let center = half * (a + b);
    let half_len = half * (b - a);
    let fc = f(center);
    let mut kronrod = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for j in 0..7 {
        let dx = half_len * T::lit(XGK[j]);
        let pair = f(center - dx) + f(center + dx);
        kronrod = kronrod + T::lit(WGK[j]) * pair;
        if j % 2 == 1 {
            gauss = gauss + T::lit(WG[j / 2]) * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half_len,
        error: ((kronrod - gauss) * half_len).abs(),
    }
}

impl<T: Scalar> Quadrature<T> {
    /// Relative tolerance only, clamped to what the precision supports.
    pub fn relative(rel_tol: f64) -> Self {
        Self {
            rel_tol: T::tol(rel_tol),
            abs_tol: T::zero(),
            max_intervals: 4000,
        }
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = T::lit(abs_tol);
        self
    }

    /// ∫ₐᵇ f.
    pub fn integrate<F: Fn(T) -> T>(&self, f: F, a: T, b: T) -> Result<QuadResult<T>> {
        self.integrate_with_breaks(f, &[a, b])
    }

    /// Integrates over `[points[0], points[last]]`, using every interior
    /// point as an initial subdivision. Points must be non-decreasing.
    pub fn integrate_with_breaks<F: Fn(T) -> T>(
        &self,
        f: F,
        points: &[T],
    ) -> Result<QuadResult<T>> {
        if points.len() < 2 {
            return Err(Error::InvalidInput(
                "quadrature needs at least two points".into(),
            ));
        }
        if points.iter().any(|p| !p.is_finite()) || points.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput(
                "quadrature breakpoints must be finite and sorted".into(),
            ));
        }
        let mut segments: Vec<Segment<T>> = points
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| gk15(&f, w[0], w[1]))
            .collect();
        let mut evaluations = 15 * segments.len();
        if segments.is_empty() {
            return Ok(QuadResult {
                value: T::zero(),
                abs_error: T::zero(),
                evaluations,
            });
        }

        let floor = T::epsilon() * T::lit(50.0);
        loop {
            let value: T = segments.iter().map(|s| s.value).sum();
            let error: T = segments.iter().map(|s| s.error).sum();
            if !value.is_finite() {
                return Err(Error::Domain {
                    what: "integrand",
                    value: value.as_f64(),
                    domain: "finite values".into(),
                });
            }
            let target = self
                .abs_tol
                .max(self.rel_tol * value.abs())
                .max(floor * value.abs());
            if error <= target {
                return Ok(QuadResult {
                    value,
                    abs_error: error,
                    evaluations,
                });
            }
            if segments.len() >= self.max_intervals {
                return Err(Error::Quadrature {
                    achieved: error.as_f64(),
                    target: target.as_f64(),
                });
            }
            let (worst, _) =
                segments
                    .iter()
                    .enumerate()
                    .fold((0, T::neg_infinity()), |(bi, be), (i, s)| {
                        if s.error > be {
                            (i, s.error)
                        } else {
                            (bi, be)
                        }
                    });
            let seg = segments.swap_remove(worst);
            let mid = T::lit(0.5) * (seg.a + seg.b);
            if mid <= seg.a || mid >= seg.b {
                // Interval can no longer be split in this precision.
                return Err(Error::Quadrature {
                    achieved: error.as_f64(),
                    target: target.as_f64(),
                });
            }
            segments.push(gk15(&f, seg.a, mid));
            segments.push(gk15(&f, mid, seg.b));
            evaluations += 30;
        }
    }
}

/// Sorted breakpoints for a feature of the given width centred at `center`:
/// `lo`, `hi` and center ± m·width for m ∈ {0, 1, 2, 4, ..., 64} that fall
/// inside (lo, hi). Gauss–Kronrod panels much wider than a sharp feature
/// near their edge can miss it entirely, so the spacing grows geometrically.
pub fn feature_breaks<T: Scalar>(lo: T, hi: T, center: T, width: T) -> Vec<T> {
    let mut p = vec![lo, hi];
    if center.is_finite() && width.is_finite() && width > T::zero() {
        for m in [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
            for x in [center - width * T::lit(m), center + width * T::lit(m)] {
                if x > lo && x < hi {
                    p.push(x);
                }
            }
        }
    }
    p.sort_by(|a, b| a.partial_cmp(b).expect("finite breakpoints"));
    p.dedup();
    p
}
