//! Closed forms for Brownian motion with drift `μ` (unit diffusion) and
//! Poissonian resetting at rate `r` to a fixed position `x_R`.
//!
//! Exit quantities live on `(0, b)`; passage quantities on the half-line with
//! the barrier at 0. Everything is evaluated in log-space so that large
//! `b √(μ² + 2r)` does not overflow.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::special::{log_add_exp, ln_one_minus_exp};

use super::model::ResetSpec;

/// Roots `d1 < 0 < d2` of `½d² + μd - r = 0`, computed without cancellation.
pub fn exponents(mu: f64, r: f64) -> (f64, f64) {
    let s = (mu * mu + 2.0 * r).sqrt();
    if mu >= 0.0 {
        let d1 = -mu - s;
        let d2 = if mu + s > 0.0 { 2.0 * r / (mu + s) } else { 0.0 };
        (d1, d2)
    } else {
        let d2 = -mu + s;
        let d1 = -2.0 * r / (s - mu);
        (d1, d2)
    }
}

/// `μ + √(μ² + 2(λ + r))`, the decay rate of the passage transform.
pub fn passage_rate(lambda: f64, mu: f64, r: f64) -> f64 {
    mu + (mu * mu + 2.0 * (lambda + r)).sqrt()
}

pub fn passage_rate_complex(lambda: Complex64, mu: f64, r: f64) -> Complex64 {
    (Complex64::new(mu * mu + 2.0 * r, 0.0) + lambda * 2.0).sqrt() + mu
}

/// Constants of the drifted-BM exit closed forms on `(0, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BmResetCoefficients {
    pub mu: f64,
    pub r: f64,
    pub x_r: f64,
    pub b: f64,
    pub d1: f64,
    pub d2: f64,
    pub c1: f64,
    pub c2: f64,
    /// `c1`, `c2` of the driftless process with the same `r`, `x_R`, `b`.
    pub c1p: f64,
    pub c2p: f64,
    #[serde(rename = "C1")]
    pub big_c1: f64,
    #[serde(rename = "C2")]
    pub big_c2: f64,
    pub pi0_at_reset: f64,
    #[serde(skip)]
    ln_den: f64,
}

fn log_den(d1: f64, d2: f64, x_r: f64, b: f64) -> f64 {
    let t1 = ln_one_minus_exp(d1 * b);
    let t2 = x_r * (d1 - d2) + d2 * b + ln_one_minus_exp(-d2 * b);
    log_add_exp(t1, t2)
}

impl BmResetCoefficients {
    pub fn new(mu: f64, r: f64, x_r: f64, b: f64) -> Result<Self> {
        if !(mu.is_finite() && r.is_finite() && b.is_finite()) {
            return Err(Error::domain("drift, rate and interval must be finite"));
        }
        if !(r > 0.0) {
            return Err(Error::domain(format!("reset rate must be > 0, got {r}")));
        }
        if !(b > 0.0) {
            return Err(Error::domain(format!("interval end b must be > 0, got {b}")));
        }
        if !(x_r > 0.0 && x_r < b) {
            return Err(Error::domain(format!("reset position {x_r} outside (0, {b})")));
        }
        let (d1, d2) = exponents(mu, r);
        if (d1 * d2 + 2.0 * r).abs() > 1e-12 * (2.0 * r).max(1.0) {
            return Err(Error::Numerical(format!("d1*d2 = {} differs from -2r", d1 * d2)));
        }
        let ln_den = log_den(d1, d2, x_r, b);
        let (p1, p2) = exponents(0.0, r);
        let ln_den0 = log_den(p1, p2, x_r, b);
        let ln_r = r.ln();
        let mut c = BmResetCoefficients {
            mu,
            r,
            x_r,
            b,
            d1,
            d2,
            c1: (-ln_den).exp(),
            c2: -(x_r * (d1 - d2) - ln_den).exp(),
            c1p: (-ln_den0).exp(),
            c2p: -(x_r * (p1 - p2) - ln_den0).exp(),
            big_c1: -(-d2 * x_r + d2 * b + ln_one_minus_exp(-d2 * b) - ln_den - ln_r).exp(),
            big_c2: -(-d2 * x_r + ln_one_minus_exp(d1 * b) - ln_den - ln_r).exp(),
            pi0_at_reset: 0.0,
            ln_den,
        };
        c.pi0_at_reset = c.pi0(x_r)?;
        Ok(c)
    }

    fn check(&self, x: f64) -> Result<f64> {
        let slack = 1e-12 * self.b;
        if x >= -slack && x <= self.b + slack {
            Ok(x.clamp(0.0, self.b))
        } else {
            Err(Error::domain(format!("x = {x} outside [0, {}]", self.b)))
        }
    }

    /// Probability of leaving `(0, b)` through 0 from `x`.
    pub fn pi0(&self, x: f64) -> Result<f64> {
        let x = self.check(x)?;
        let (d1, d2, b) = (self.d1, self.d2, self.b);
        let t1 = d1 * x + ln_one_minus_exp(d1 * (b - x));
        let t2 = self.x_r * (d1 - d2) + d2 * b + ln_one_minus_exp(-d2 * (b - x));
        Ok((log_add_exp(t1, t2) - self.ln_den).exp().clamp(0.0, 1.0))
    }

    /// Mean exit time from `(0, b)` starting at `x`.
    pub fn mean_fet(&self, x: f64) -> Result<f64> {
        let x = self.check(x)?;
        if x == 0.0 || x == self.b {
            return Ok(0.0);
        }
        let (d1, d2, b) = (self.d1, self.d2, self.b);
        let l1 = d2 * b + ln_one_minus_exp(-d2 * b) + ln_one_minus_exp(d1 * x);
        let l2 = ln_one_minus_exp(d1 * b) + d2 * x + ln_one_minus_exp(-d2 * x);
        let scale = (l1 - d2 * self.x_r - self.ln_den - self.r.ln()).exp();
        Ok((scale * -(l2 - l1).exp_m1()).max(0.0))
    }

    /// `π0'(x)` and `π0''(x)` from the closed form.
    pub fn pi0_derivatives(&self, x: f64) -> (f64, f64) {
        let e1 = self.c1 * (self.d1 * x).exp();
        let e2 = self.c2 * (self.d2 * x).exp();
        (
            self.d1 * e1 + self.d2 * e2,
            self.d1 * self.d1 * e1 + self.d2 * self.d2 * e2,
        )
    }
}

pub fn bm_coefficients(mu: f64, reset: &ResetSpec, b: f64) -> Result<BmResetCoefficients> {
    reset.validate()?;
    BmResetCoefficients::new(mu, reset.rate, reset.fixed_position()?, b)
}

/// Exit probability through 0 for drifted BM with resetting.
pub fn pi0_bm(x: f64, mu: f64, reset: &ResetSpec, b: f64) -> Result<f64> {
    bm_coefficients(mu, reset, b)?.pi0(x)
}

/// Exit probability through 0 without resetting.
pub fn pi0_classical(x: f64, mu: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) || !(x >= -1e-12 * b && x <= b * (1.0 + 1e-12)) {
        return Err(Error::domain(format!("x = {x} outside [0, {b}]")));
    }
    let x = x.clamp(0.0, b);
    let v = if mu.abs() < 1e-7 {
        (1.0 - x / b) * (1.0 - mu * x)
    } else if mu > 0.0 {
        (-2.0 * mu * x).exp() * (-2.0 * mu * (b - x)).exp_m1() / (-2.0 * mu * b).exp_m1()
    } else {
        (2.0 * mu * (b - x)).exp_m1() / (2.0 * mu * b).exp_m1()
    };
    Ok(v.clamp(0.0, 1.0))
}

fn half_line_args(x: f64, reset: &ResetSpec) -> Result<(f64, f64)> {
    reset.validate()?;
    let x_r = reset.fixed_position()?;
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("start position must be finite and >= 0, got {x}")));
    }
    if !(x_r >= 0.0) {
        return Err(Error::domain(format!("reset position must be >= 0, got {x_r}")));
    }
    Ok((reset.rate, x_r))
}

/// Mean first-passage time through 0 from `x`.
pub fn mean_fpt_bm(x: f64, mu: f64, reset: &ResetSpec) -> Result<f64> {
    let (r, x_r) = half_line_args(x, reset)?;
    if r == 0.0 {
        return Err(Error::domain("mean passage time formula needs r > 0"));
    }
    Ok(mean_fpt_kernel(x, mu, r, x_r))
}

pub(crate) fn mean_fpt_kernel(x: f64, mu: f64, r: f64, x_r: f64) -> f64 {
    let k = passage_rate(0.0, mu, r);
    -(-x * k).exp_m1() * (x_r * k).exp() / r
}

/// `E[e^{-λτ(x)}]` for the first passage through 0.
pub fn fpt_lt_bm(lambda: f64, x: f64, mu: f64, reset: &ResetSpec) -> Result<f64> {
    let (r, x_r) = half_line_args(x, reset)?;
    if !(lambda >= 0.0) {
        return Err(Error::domain(format!("lambda must be >= 0, got {lambda}")));
    }
    Ok(fpt_lt_kernel(lambda, x, mu, r, x_r))
}

pub(crate) fn fpt_lt_kernel(lambda: f64, x: f64, mu: f64, r: f64, x_r: f64) -> f64 {
    let k = passage_rate(lambda, mu, r);
    if r == 0.0 {
        return (-x * k).exp();
    }
    if lambda == 0.0 {
        return 1.0;
    }
    let e = (-x * k).exp();
    let w = r * (-x_r * k).exp();
    e + w / (lambda + w) * -(-x * k).exp_m1()
}

/// `E[e^{-λτ(x)}]` continued to complex `λ`.
pub fn fpt_lt_bm_complex(lambda: Complex64, x: f64, mu: f64, r: f64, x_r: f64) -> Complex64 {
    let k = passage_rate_complex(lambda, mu, r);
    let one = Complex64::new(1.0, 0.0);
    if lambda == Complex64::new(0.0, 0.0) {
        return one;
    }
    let e = (-k * x).exp();
    let w = (-k * x_r).exp() * r;
    e + w / (lambda + w) * (one - e)
}

/// The reset weight `C(λ) = r e^{-x_R k} / (λ + r e^{-x_R k})`, `k = μ + √(μ²+2(λ+r))`.
pub fn reset_weight(lambda: Complex64, mu: f64, r: f64, x_r: f64) -> Complex64 {
    let e = (-passage_rate_complex(lambda, mu, r) * x_r).exp() * r;
    e / (lambda + e)
}

/// Mean exit time from `(0, b)` starting at `x`.
pub fn mean_fet_bm(x: f64, mu: f64, reset: &ResetSpec, b: f64) -> Result<f64> {
    bm_coefficients(mu, reset, b)?.mean_fet(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exponents_examples() {
        let (d1, d2) = exponents(0.0, 1.0);
        assert!((d1 + 2f64.sqrt()).abs() < 1e-15 && (d2 - 2f64.sqrt()).abs() < 1e-15);
        let (d1, d2) = exponents(1.0, 2.0);
        assert!((d1 - (-1.0 - 5f64.sqrt())).abs() < 1e-14);
        assert!((d2 - (-1.0 + 5f64.sqrt())).abs() < 1e-14);
        assert!((d1 * d2 + 4.0).abs() < 1e-14);
    }

    #[test]
    fn coefficients_match_raw_formulas() {
        let (mu, r, x_r, b) = (0.4, 1.3, 0.3, 1.2);
        let c = BmResetCoefficients::new(mu, r, x_r, b).unwrap();
        let (d1, d2) = (c.d1, c.d2);
        let den = 1.0 - (d1 * b).exp() - (x_r * (d1 - d2)).exp() * (1.0 - (d2 * b).exp());
        assert!((c.c1 - 1.0 / den).abs() < 1e-13);
        assert!((c.c2 + (x_r * (d1 - d2)).exp() / den).abs() < 1e-13);
        let big1 = (-d2 * x_r).exp() * (1.0 - (d2 * b).exp()) / (den * r);
        let big2 = -(-d2 * x_r).exp() * (1.0 - (d1 * b).exp()) / (den * r);
        assert!((c.big_c1 - big1).abs() < 1e-13);
        assert!((c.big_c2 - big2).abs() < 1e-13);
        let s = (2.0 * r).sqrt();
        let den0 = 1.0 - (-b * s).exp() - (-2.0 * x_r * s).exp() * (1.0 - (b * s).exp());
        assert!((c.c1p - 1.0 / den0).abs() < 1e-13);
        assert!((c.c2p + (-2.0 * x_r * s).exp() / den0).abs() < 1e-13);
        let at_reset = -c.c1 * (d1 * b).exp() - c.c2 * (d2 * b).exp();
        assert!((c.pi0_at_reset - at_reset).abs() < 1e-13);
        for i in 0..=10 {
            let x = b * i as f64 / 10.0;
            let raw = c.c1 * ((d1 * x).exp() - (d1 * b).exp()) + c.c2 * ((d2 * x).exp() - (d2 * b).exp());
            assert!((c.pi0(x).unwrap() - raw).abs() < 1e-13);
            let fet = big1 * ((d1 * x).exp() - 1.0) + big2 * ((d2 * x).exp() - 1.0);
            assert!((c.mean_fet(x).unwrap() - fet).abs() < 1e-12);
        }
    }

    #[test]
    fn pi0_boundary_and_symmetry() {
        let reset = ResetSpec::fixed(3.0, 0.5);
        assert_eq!(pi0_bm(0.0, 0.0, &reset, 1.0).unwrap(), 1.0);
        assert_eq!(pi0_bm(1.0, 0.0, &reset, 1.0).unwrap(), 0.0);
        assert!((pi0_bm(0.5, 0.0, &reset, 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert!(matches!(pi0_bm(1.5, 0.0, &reset, 1.0), Err(Error::Domain(_))));
        assert!(matches!(pi0_bm(0.5, 0.0, &ResetSpec::fixed(1.0, 1.0), 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn classical_examples() {
        assert_eq!(pi0_classical(0.25, 0.0, 1.0).unwrap(), 0.75);
        let v = pi0_classical(0.5, 0.5, 1.0).unwrap();
        let exact = ((-0.5f64).exp() - (-1f64).exp()) / (1.0 - (-1f64).exp());
        assert!((v - exact).abs() < 1e-15);
        assert!((v - 0.3775).abs() < 1e-4);
        assert_eq!(pi0_classical(0.0, -3.0, 2.0).unwrap(), 1.0);
        // branch switch continuity
        for &x in &[0.1, 0.5, 0.9] {
            let a = pi0_classical(x, 1.0001e-7, 1.0).unwrap();
            let b = pi0_classical(x, 0.9999e-7, 1.0).unwrap();
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn mean_fpt_examples() {
        let reset = ResetSpec::fixed(1.0, 1.0);
        assert_eq!(mean_fpt_bm(0.0, 0.0, &reset).unwrap(), 0.0);
        let s2 = 2f64.sqrt();
        let v = mean_fpt_bm(1.0, 0.0, &reset).unwrap();
        assert!((v - (1.0 - (-s2).exp()) * s2.exp()).abs() < 1e-14);
        let lim = mean_fpt_bm(1e3, 0.3, &reset).unwrap();
        assert!((lim - (1.0 * (0.3 + (0.09f64 + 2.0).sqrt())).exp()).abs() < 1e-12);
        assert!(matches!(mean_fpt_bm(1.0, 0.0, &ResetSpec::fixed(0.0, 1.0)), Err(Error::Domain(_))));
        // -d/dλ of the transform at 0
        let h = 1e-4;
        let fd = -(fpt_lt_bm(h, 1.0, 0.0, &reset).unwrap() - fpt_lt_bm(0.0, 1.0, 0.0, &reset).unwrap()) / h;
        let fd2 = -(fpt_lt_bm(2.0 * h, 1.0, 0.0, &reset).unwrap() - fpt_lt_bm(0.0, 1.0, 0.0, &reset).unwrap())
            / (2.0 * h);
        assert!(((2.0 * fd - fd2) - v).abs() < 1e-6 * v);
    }

    #[test]
    fn transform_edge_values() {
        let reset = ResetSpec::fixed(1.0, 1.0);
        assert_eq!(fpt_lt_bm(0.0, 3.0, 0.2, &reset).unwrap(), 1.0);
        assert_eq!(fpt_lt_bm(5.0, 0.0, 0.2, &reset).unwrap(), 1.0);
        let c = fpt_lt_bm_complex(Complex64::new(0.7, 0.0), 1.3, -0.2, 1.0, 0.8);
        let r = fpt_lt_bm(0.7, 1.3, -0.2, &ResetSpec::fixed(1.0, 0.8)).unwrap();
        assert!((c.re - r).abs() < 1e-15 && c.im.abs() < 1e-15);
        // literal form of the transform
        let (lam, x, mu, x_r): (f64, f64, f64, f64) = (0.7, 1.3, -0.2, 0.8);
        let k = mu + (mu * mu + 2.0 * (lam + 1.0)).sqrt();
        let cw = (-x_r * k).exp() / (lam + (-x_r * k).exp());
        let lit = (-x * k).exp() + cw * (1.0 - (-x * k).exp());
        assert!((r - lit).abs() < 1e-15);
        assert!((reset_weight(Complex64::new(lam, 0.0), mu, 1.0, x_r).re - cw).abs() < 1e-15);
    }

    #[test]
    fn fet_symmetry_and_boundaries() {
        let reset = ResetSpec::fixed(1.0, 0.5);
        assert_eq!(mean_fet_bm(0.0, 0.0, &reset, 1.0).unwrap(), 0.0);
        assert_eq!(mean_fet_bm(1.0, 0.0, &reset, 1.0).unwrap(), 0.0);
        for i in 1..10 {
            let x = i as f64 / 10.0;
            let a = mean_fet_bm(x, 0.0, &reset, 1.0).unwrap();
            let b = mean_fet_bm(1.0 - x, 0.0, &reset, 1.0).unwrap();
            assert!(a > 0.0);
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn large_interval_does_not_overflow() {
        let c = BmResetCoefficients::new(0.5, 50.0, 40.0, 80.0).unwrap();
        for &x in &[0.0, 1.0, 39.0, 40.0, 79.0, 80.0] {
            let p = c.pi0(x).unwrap();
            assert!(p.is_finite() && (0.0..=1.0).contains(&p));
            assert!(c.mean_fet(x).unwrap().is_finite());
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn pi0_satisfies_nonlocal_ode(mu in -2.0..2.0f64, r in 0.05..5.0f64, b in 0.3..3.0f64, t in 0.05..0.95f64) {
            let x_r = t * b;
            let c = BmResetCoefficients::new(mu, r, x_r, b).unwrap();
            prop_assert!((c.pi0(0.0).unwrap() - 1.0).abs() < 1e-12);
            prop_assert!(c.pi0(b).unwrap().abs() < 1e-12);
            let mut sup: f64 = 0.0;
            for i in 0..200 {
                let x = b * i as f64 / 199.0;
                let p = c.pi0(x).unwrap();
                prop_assert!((0.0..=1.0).contains(&p));
                let (f1, f2) = c.pi0_derivatives(x);
                sup = sup.max((0.5 * f2 + mu * f1 - r * p + r * c.pi0_at_reset).abs());
            }
            prop_assert!(sup < 1e-9, "residual {}", sup);
        }

        #[test]
        fn classical_limit(mu in -2.0..2.0f64, b in 0.3..3.0f64, t in 0.05..0.95f64) {
            let reset = ResetSpec::fixed(1e-8, t * b);
            for i in 0..200 {
                let x = b * i as f64 / 199.0;
                let d = (pi0_bm(x, mu, &reset, b).unwrap() - pi0_classical(x, mu, b).unwrap()).abs();
                prop_assert!(d < 1e-4);
            }
        }

        #[test]
        fn transform_decreases_in_lambda(mu in -1.0..1.0f64, r in 0.1..3.0f64, x in 0.01..3.0f64, x_r in 0.01..3.0f64) {
            let reset = ResetSpec::fixed(r, x_r);
            let mut prev = fpt_lt_bm(0.0, x, mu, &reset).unwrap();
            prop_assert_eq!(prev, 1.0);
            for i in 1..40 {
                let lam = 1e-3 * 1.5f64.powi(i);
                let v = fpt_lt_bm(lam, x, mu, &reset).unwrap();
                prop_assert!(v > 0.0 && v < prev);
                prev = v;
            }
        }
    }
}
