//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Intervals are kept in a max-heap keyed on their error estimate and the worst
//! one is bisected until the summed error estimate meets
//! `max(abs_tol, rel_tol * |I|)`. An interval that has already been bisected
//! `max_depth` times is frozen.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
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

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Values that can be integrated: reals and complex numbers.
pub trait QuadValue:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + Send + Sync
{
    fn zero() -> Self;
    fn magnitude(&self) -> f64;
    fn is_finite_value(&self) -> bool;
}

impl QuadValue for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(&self) -> f64 {
        self.abs()
    }
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl QuadValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite_value(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_depth: u32,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-14,
            max_depth: 40,
            max_intervals: 20_000,
        }
    }
}

impl QuadConfig {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult<T> {
    pub value: T,
    pub error: f64,
    pub evaluations: usize,
}

// Returns the rescaled error and whether it sits on the roundoff floor.
fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> (f64, bool) {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        let min_err = 50.0 * f64::EPSILON * res_abs;
        if min_err >= scaled {
            return (min_err, true);
        }
    }
    (scaled, false)
}

/// One 15-point Kronrod rule on `[a, b]`; returns (integral, error estimate).
fn kronrod15<T: QuadValue, F: Fn(f64) -> T>(f: &F, a: f64, b: f64) -> (T, f64, bool) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = f(center);
    let mut res_k = f_center * WGK[7];
    let mut res_g = f_center * WG[3];
    let mut res_abs = f_center.magnitude() * WGK[7];
    let mut fv1 = [T::zero(); 7];
    let mut fv2 = [T::zero(); 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        let sum = f1 + f2;
        res_k = res_k + sum * WGK[j];
        res_abs += WGK[j] * (f1.magnitude() + f2.magnitude());
        if j % 2 == 1 {
            res_g = res_g + sum * WG[j / 2];
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).magnitude();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).magnitude() + (fv2[j] - mean).magnitude());
    }
    let abs_half = half.abs();
    let err = ((res_k - res_g) * half).magnitude();
    let (e, floor) = rescale_error(err, res_abs * abs_half, res_asc * abs_half);
    (res_k * half, e, floor)
}

struct Segment<T> {
    a: f64,
    b: f64,
    value: T,
    error: f64,
    depth: u32,
    roundoff: bool,
}

impl<T> PartialEq for Segment<T> {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl<T> Eq for Segment<T> {}
impl<T> PartialOrd for Segment<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl<T> Ord for Segment<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Integrate `f` over `[a, b]`.
pub fn integrate<T, F>(f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    integrate_with_breaks(f, &[a, b], cfg)
}

/// Integrate over consecutive pieces `[p0, p1], [p1, p2], ...` (kinks, jumps).
pub fn integrate_with_breaks<T, F>(f: F, points: &[f64], cfg: &QuadConfig) -> Result<QuadResult<T>>
where
    T: QuadValue,
    F: Fn(f64) -> T,
{
    if points.len() < 2 {
        return Err(Error::domain("quadrature needs at least two points"));
    }
    if points.iter().any(|p| !p.is_finite()) {
        return Err(Error::domain("quadrature limits must be finite"));
    }
    let mut heap = BinaryHeap::new();
    let mut frozen_value = T::zero();
    let mut frozen_error = 0.0;
    let mut depth_limited = false;
    let mut evaluations = 0usize;
    for w in points.windows(2) {
        let (a, b) = (w[0], w[1]);
        if a == b {
            continue;
        }
        let (value, error, roundoff) = kronrod15(&f, a, b);
        evaluations += 15;
        heap.push(Segment {
            a,
            b,
            value,
            error,
            depth: 0,
            roundoff,
        });
    }
    loop {
        let mut total = frozen_value;
        let mut total_err = frozen_error;
        for s in heap.iter() {
            total = total + s.value;
            total_err += s.error;
        }
        if !total.is_finite_value() {
            return Err(Error::Quadrature {
                message: "integrand produced a non-finite value".into(),
                estimate: f64::INFINITY,
            });
        }
        let target = cfg.abs_tol.max(cfg.rel_tol * total.magnitude());
        if total_err <= target {
            return Ok(QuadResult {
                value: total,
                error: total_err,
                evaluations,
            });
        }
        let Some(worst) = heap.pop() else {
            if !depth_limited {
                // only roundoff-limited error remains
                return Ok(QuadResult {
                    value: total,
                    error: total_err,
                    evaluations,
                });
            }
            return Err(Error::Quadrature {
                message: format!("maximum bisection depth {} reached", cfg.max_depth),
                estimate: total_err,
            });
        };
        if worst.roundoff || worst.depth >= cfg.max_depth || heap.len() >= cfg.max_intervals {
            depth_limited |= !worst.roundoff;
            frozen_value = frozen_value + worst.value;
            frozen_error += worst.error;
            if heap.len() >= cfg.max_intervals {
                return Err(Error::Quadrature {
                    message: format!("interval budget {} exhausted", cfg.max_intervals),
                    estimate: total_err,
                });
            }
            continue;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let (v1, e1, r1) = kronrod15(&f, worst.a, mid);
        let (v2, e2, r2) = kronrod15(&f, mid, worst.b);
        evaluations += 30;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            depth: worst.depth + 1,
            roundoff: r1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            depth: worst.depth + 1,
            roundoff: r2,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x: f64| x.powi(5) - 2.0 * x, 0.0, 2.0, &QuadConfig::default()).unwrap();
        assert!((r.value - (64.0 / 6.0 - 4.0)).abs() < 1e-13);
    }

    #[test]
    fn exponential_to_tolerance() {
        let r = integrate(|x: f64| (-x).exp(), 0.0, 30.0, &QuadConfig::default()).unwrap();
        assert!((r.value - (1.0 - (-30.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn complex_integrand() {
        // ∫_0^π e^{ix} dx = 2i
        let r = integrate(
            |x: f64| Complex64::new(0.0, x).exp(),
            0.0,
            std::f64::consts::PI,
            &QuadConfig::default(),
        )
        .unwrap();
        assert!((r.value - Complex64::new(0.0, 2.0)).norm() < 1e-12);
    }

    #[test]
    fn kink_with_breakpoint() {
        let r = integrate_with_breaks(|x: f64| (x - 0.3).abs(), &[0.0, 0.3, 1.0], &QuadConfig::default())
            .unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-14);
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let r = integrate(|_x: f64| f64::NAN, 0.0, 1.0, &QuadConfig::default());
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn zero_integral_uses_absolute_tolerance() {
        let r = integrate(|x: f64| x, -1.0, 1.0, &QuadConfig::default()).unwrap();
        assert!(r.value.abs() < 1e-15);
    }
}
