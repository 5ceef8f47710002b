//! Laplace-domain tools: recovering the start-law transform from a passage-time
//! transform, moments of a passage-time law, and numerical inversion.

use std::f64::consts::{LN_2, PI};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analytic::bm::{passage_rate_complex, reset_weight};
use crate::densities::DensityFamily;
use crate::error::{Error, Result};
use crate::forward::{fpt_lt_case1, fpt_lt_case2};
use crate::quadrature::QuadConfig;

/// A Laplace transform `f̂(s) = E[e^{-sτ}]` that can be evaluated off the real axis.
pub trait LaplaceTransform: Send + Sync {
    fn eval(&self, s: Complex64) -> Complex64;

    fn eval_real(&self, s: f64) -> f64 {
        self.eval(Complex64::new(s, 0.0)).re
    }
}

impl<F> LaplaceTransform for F
where
    F: Fn(Complex64) -> Complex64 + Send + Sync,
{
    fn eval(&self, s: Complex64) -> Complex64 {
        self(s)
    }
}

/// Passage-time transform of drifted BM with resetting and one random ingredient.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "snake_case", deny_unknown_fields)]
pub enum PassageTransform {
    /// Start drawn from `g`, fixed reset position.
    RandomInitial {
        g: DensityFamily,
        mu: f64,
        r: f64,
        x_r: f64,
    },
    /// Fixed start `x`, reset position drawn from `h`.
    RandomReset {
        h: DensityFamily,
        x: f64,
        mu: f64,
        r: f64,
    },
}

impl PassageTransform {
    pub fn random_initial(g: DensityFamily, mu: f64, r: f64, x_r: f64) -> Self {
        PassageTransform::RandomInitial { g, mu, r, x_r }
    }

    pub fn random_reset(h: DensityFamily, x: f64, mu: f64, r: f64) -> Self {
        PassageTransform::RandomReset { h, x, mu, r }
    }

    /// Real-axis value through the forward module.
    pub fn value(&self, lambda: f64) -> Result<f64> {
        match self {
            PassageTransform::RandomInitial { g, mu, r, x_r } => {
                fpt_lt_case1(lambda, g, *mu, &crate::analytic::ResetSpec::fixed(*r, *x_r)).map(|v| v.value)
            }
            PassageTransform::RandomReset { h, x, mu, r } => {
                fpt_lt_case2(lambda, h, *x, *mu, *r).map(|v| v.value)
            }
        }
    }

    fn eval_complex(&self, s: Complex64) -> Result<Complex64> {
        let one = Complex64::new(1.0, 0.0);
        if s == Complex64::new(0.0, 0.0) {
            return Ok(one);
        }
        match self {
            PassageTransform::RandomInitial { g, mu, r, x_r } => {
                let k = passage_rate_complex(s, *mu, *r);
                let c = reset_weight(s, *mu, *r, *x_r);
                Ok((one - c) * g.laplace_complex(k)? + c)
            }
            PassageTransform::RandomReset { h, x, mu, r } => {
                let k = passage_rate_complex(s, *mu, *r);
                let e = (-k * *x).exp();
                let avg = h.expect(
                    |u| {
                        let w = (-k * u).exp() * *r;
                        w / (s + w)
                    },
                    &QuadConfig::default().with_rel_tol(1e-12),
                )?;
                Ok(e + (one - e) * avg.value)
            }
        }
    }
}

impl LaplaceTransform for PassageTransform {
    fn eval(&self, s: Complex64) -> Complex64 {
        self.eval_complex(s)
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN))
    }

    fn eval_real(&self, s: f64) -> f64 {
        self.value(s).unwrap_or(f64::NAN)
    }
}

/// Shared handle to a transform.
pub type SharedTransform = Arc<dyn LaplaceTransform>;

/// Half-width of the excluded band around `θ = μ + √(μ² + 2r)`.
pub const GHAT_GUARD: f64 = 1e-6;

/// Transform of the start law at `θ` recovered from the passage-time transform.
///
/// Only `θ` above the root `μ + √(μ² + 2r)` is admissible: below it the
/// induced `λ` is negative, or the identity refers to a different argument.
pub fn ifpt_ghat_from_fhat(
    theta: f64,
    fhat: &dyn LaplaceTransform,
    mu: f64,
    r: f64,
    x_r: f64,
) -> Result<f64> {
    if !(r > 0.0 && theta.is_finite()) {
        return Err(Error::domain("need r > 0 and finite theta"));
    }
    let s = (mu * mu + 2.0 * r).sqrt();
    let upper = mu + s;
    let lower = mu - s;
    if (theta - upper).abs() <= GHAT_GUARD || (theta - lower).abs() <= GHAT_GUARD {
        return Err(Error::Singularity(format!(
            "theta = {theta} within {GHAT_GUARD} of a root of θ²/2 - θμ - r"
        )));
    }
    let lambda = 0.5 * (theta - upper) * (theta - lower);
    if theta < upper {
        return Err(Error::domain(format!(
            "theta = {theta} below {upper}: induced lambda = {lambda} is not an admissible argument"
        )));
    }
    let w = r * (-theta * x_r).exp();
    let f = fhat.eval_real(lambda);
    Ok(((lambda + w) * f - w) / lambda)
}

/// Raw and central moments of a passage-time law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Moments {
    /// `m_1 … m_k`.
    pub raw: Vec<f64>,
    /// `μ_2 … μ_k`.
    pub central: Vec<f64>,
    pub mean: f64,
    pub variance: Option<f64>,
    pub skewness: Option<f64>,
    pub excess_kurtosis: Option<f64>,
    pub method: MomentMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentMethod {
    Contour,
    FiniteDifference,
}

const CONTOUR_NODES: usize = 128;
const CONTOUR_TOL: f64 = 1e-9;

// Taylor coefficients a_0..a_k of f̂ at 0 by the trapezoid rule on |s| = ρ.
fn taylor_on_circle(fhat: &dyn LaplaceTransform, rho: f64, k: usize) -> Option<Vec<f64>> {
    let n = CONTOUR_NODES;
    let mut acc = vec![0.0; k + 1];
    for j in 0..n {
        let phi = 2.0 * PI * j as f64 / n as f64;
        let z = Complex64::from_polar(rho, phi);
        let v = fhat.eval(z);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return None;
        }
        for (m, a) in acc.iter_mut().enumerate() {
            *a += (v * Complex64::from_polar(1.0, -(m as f64) * phi)).re;
        }
    }
    Some(
        acc.iter()
            .enumerate()
            .map(|(m, a)| a / (n as f64 * rho.powi(m as i32)))
            .collect(),
    )
}

fn raw_from_taylor(a: &[f64]) -> Vec<f64> {
    let mut fact = 1.0;
    (1..a.len())
        .map(|m| {
            fact *= m as f64;
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            sign * fact * a[m]
        })
        .collect()
}

fn agree(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - y).abs() <= tol * x.abs().max(y.abs()).max(1e-300) || (x - y).abs() < 1e-13)
}

fn contour_moments(fhat: &dyn LaplaceTransform, k: usize) -> Option<Vec<f64>> {
    let mut prev: Option<Vec<f64>> = None;
    let mut rho = 0.5;
    for _ in 0..12 {
        if let Some(a) = taylor_on_circle(fhat, rho, k) {
            let m = raw_from_taylor(&a);
            if let Some(p) = &prev {
                if agree(p, &m, CONTOUR_TOL) {
                    return Some(m);
                }
            }
            prev = Some(m);
        } else {
            prev = None;
        }
        rho *= 0.5;
    }
    None
}

// k-th forward difference of f̂ at 0 with step h.
fn forward_difference(fhat: &dyn LaplaceTransform, k: usize, h: f64) -> f64 {
    let mut binom = 1.0;
    let mut sum = 0.0;
    for j in 0..=k {
        let sign = if (k - j).is_multiple_of(2) { 1.0 } else { -1.0 };
        sum += sign * binom * fhat.eval_real(j as f64 * h);
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    sum / h.powi(k as i32)
}

fn fd_moments(fhat: &dyn LaplaceTransform, k: usize) -> Result<Vec<f64>> {
    const BASE: f64 = 1e-3;
    const LEVELS: usize = 5;
    let mut out = Vec::with_capacity(k);
    for order in 1..=k {
        // Richardson on an O(h) one-sided scheme: halving h, factors 2, 4, 8, 16.
        // Roundoff grows like eps / h^order, so higher orders start wider.
        let base = BASE * f64::powi(4.0, order as i32 - 1);
        let mut table: Vec<Vec<f64>> = Vec::new();
        for l in 0..LEVELS {
            let h = base / f64::powi(2.0, l as i32);
            let mut row = vec![forward_difference(fhat, order, h)];
            for j in 1..=l {
                let p = f64::powi(2.0, j as i32);
                let v = (p * row[j - 1] - table[l - 1][j - 1]) / (p - 1.0);
                row.push(v);
            }
            table.push(row);
        }
        let best = table[LEVELS - 1][LEVELS - 1];
        let prev = table[LEVELS - 2][LEVELS - 2];
        if (best - prev).abs() > 1e-3 * best.abs().max(1e-12) {
            return Err(Error::Numerical(format!(
                "finite-difference extrapolation for order {order} did not settle ({prev} vs {best})"
            )));
        }
        let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
        out.push(sign * best);
    }
    Ok(out)
}

/// Moments `m_k = (-1)^k f̂^{(k)}(0)` for `k = 1..=order` (`order ≤ 4`), the central
/// moments assembled from them, skewness and excess kurtosis.
///
/// Derivatives come from Cauchy's integral on shrinking circles around the
/// origin; a one-sided Richardson scheme on the real axis is the fallback.
pub fn moments_from_lt(fhat: &dyn LaplaceTransform, order: usize) -> Result<Moments> {
    if !(1..=4).contains(&order) {
        return Err(Error::domain(format!("moment order must be 1..=4, got {order}")));
    }
    let f0 = fhat.eval_real(0.0);
    if (f0 - 1.0).abs() > 1e-6 {
        return Err(Error::domain(format!("transform at 0 is {f0}, not 1")));
    }
    let (raw, method) = match contour_moments(fhat, order) {
        Some(m) => (m, MomentMethod::Contour),
        None => (fd_moments(fhat, order)?, MomentMethod::FiniteDifference),
    };
    let m1 = raw[0];
    let mut central = Vec::new();
    if order >= 2 {
        central.push(raw[1] - m1 * m1);
    }
    if order >= 3 {
        central.push(raw[2] - 3.0 * m1 * raw[1] + 2.0 * m1.powi(3));
    }
    if order >= 4 {
        central.push(raw[3] - 4.0 * m1 * raw[2] + 6.0 * m1 * m1 * raw[1] - 3.0 * m1.powi(4));
    }
    let var = central.first().copied();
    let positive_var = var.filter(|v| *v > 0.0);
    Ok(Moments {
        mean: m1,
        variance: var,
        skewness: positive_var.and_then(|v| central.get(1).map(|m3| m3 / v.powf(1.5))),
        excess_kurtosis: positive_var.and_then(|v| central.get(2).map(|m4| m4 / (v * v) - 3.0)),
        raw,
        central,
        method,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum InversionMethod {
    Talbot,
    Stehfest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InversionConfig {
    pub talbot_nodes: usize,
    pub stehfest_terms: usize,
    /// Fail when the trapezoid mass over the grid misses 1 by more than this.
    pub mass_tolerance: Option<f64>,
}

impl Default for InversionConfig {
    fn default() -> Self {
        InversionConfig {
            talbot_nodes: 24,
            stehfest_terms: 18,
            mass_tolerance: Some(1e-2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Inversion {
    pub t: Vec<f64>,
    pub f: Vec<f64>,
    /// Trapezoid mass of the negative ringing that was clipped to zero.
    pub clip_mass: f64,
    /// Trapezoid mass over the grid.
    pub mass: f64,
    /// Trapezoid mean over the grid.
    pub mean: f64,
    pub method: InversionMethod,
}

const INITIAL_VALUE_S: f64 = 1e10;

fn talbot(fhat: &dyn LaplaceTransform, t: f64, m: usize) -> f64 {
    if t == 0.0 {
        return initial_value(fhat);
    }
    let r = 2.0 * m as f64 / (5.0 * t);
    let mut sum = 0.5 * fhat.eval_real(r) * (r * t).exp();
    for k in 1..m {
        let th = k as f64 * PI / m as f64;
        let cot = th.cos() / th.sin();
        let s = Complex64::new(r * th * cot, r * th);
        let sigma = th + (th * cot - 1.0) * cot;
        let term = (s * t).exp() * fhat.eval(s) * Complex64::new(1.0, sigma);
        sum += term.re;
    }
    r / m as f64 * sum
}

// lim_{t→0} f(t) = lim_{s→∞} s f̂(s); +∞ when the limit does not settle.
fn initial_value(fhat: &dyn LaplaceTransform) -> f64 {
    let a = INITIAL_VALUE_S * fhat.eval_real(INITIAL_VALUE_S);
    let b = 100.0 * INITIAL_VALUE_S * fhat.eval_real(100.0 * INITIAL_VALUE_S);
    if (a - b).abs() <= 1e-6 * a.abs().max(1.0) {
        b
    } else {
        f64::INFINITY
    }
}

fn stehfest_weights(n: usize) -> Vec<f64> {
    let half = n / 2;
    let fact = |k: usize| (1..=k).fold(1.0, |a, i| a * i as f64);
    (1..=n)
        .map(|k| {
            let mut s = 0.0;
            for j in k.div_ceil(2)..=k.min(half) {
                s += (j as f64).powi(half as i32) * fact(2 * j)
                    / (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
            }
            if (k + half).is_multiple_of(2) {
                s
            } else {
                -s
            }
        })
        .collect()
}

fn stehfest(fhat: &dyn LaplaceTransform, t: f64, weights: &[f64]) -> f64 {
    if t == 0.0 {
        return initial_value(fhat);
    }
    let a = LN_2 / t;
    weights
        .iter()
        .enumerate()
        .map(|(i, w)| w * fhat.eval_real((i + 1) as f64 * a))
        .sum::<f64>()
        * a
}

// Trapezoid mass and mean; an infinite value at t = 0 is treated as a
// t^{-1/2} singularity whose first panel integrates to 2 h f(h).
fn trapezoid(t: &[f64], f: &[f64]) -> (f64, f64) {
    let mut mass = 0.0;
    let mut mean = 0.0;
    for i in 1..t.len() {
        let h = t[i] - t[i - 1];
        if f[i - 1].is_infinite() && i == 1 {
            mass += 2.0 * h * f[i];
            mean += 2.0 / 3.0 * h * t[i] * f[i];
        } else {
            mass += 0.5 * h * (f[i - 1] + f[i]);
            mean += 0.5 * h * (t[i - 1] * f[i - 1] + t[i] * f[i]);
        }
    }
    (mass, mean)
}

fn finish(t: &[f64], raw: Vec<f64>, method: InversionMethod) -> Inversion {
    let neg: Vec<f64> = raw.iter().map(|v| if *v < 0.0 { -v } else { 0.0 }).collect();
    let (clip_mass, _) = trapezoid(t, &neg);
    let f: Vec<f64> = raw.iter().map(|v| v.max(0.0)).collect();
    let (mass, mean) = trapezoid(t, &f);
    Inversion {
        t: t.to_vec(),
        f,
        clip_mass,
        mass,
        mean,
        method,
    }
}

/// Density values `f(t)` on an increasing grid of `t ≥ 0`.
///
/// `mass` and `mean` are trapezoid sums over the grid. Densities that blow up
/// at the origin need a grid graded towards zero for those to be accurate.
pub fn laplace_invert(fhat: &dyn LaplaceTransform, t: &[f64]) -> Result<Inversion> {
    laplace_invert_with(fhat, t, &InversionConfig::default())
}

pub fn laplace_invert_with(fhat: &dyn LaplaceTransform, t: &[f64], cfg: &InversionConfig) -> Result<Inversion> {
    if t.len() < 2 || t[0] < 0.0 || t.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::domain("time grid must be increasing, start at t >= 0 and have >= 2 points"));
    }
    let f0 = fhat.eval_real(0.0);
    if (f0 - 1.0).abs() > 1e-6 {
        return Err(Error::domain(format!("transform at 0 is {f0}, not 1")));
    }
    let tal = finish(
        t,
        t.iter().map(|&ti| talbot(fhat, ti, cfg.talbot_nodes)).collect(),
        InversionMethod::Talbot,
    );
    let miss = |inv: &Inversion| {
        if inv.f.iter().skip(1).all(|v| v.is_finite()) {
            (inv.mass - 1.0).abs() + inv.clip_mass
        } else {
            f64::INFINITY
        }
    };
    let tol = cfg.mass_tolerance.unwrap_or(f64::INFINITY);
    let best = if miss(&tal) <= tol.min(1e-3) {
        tal
    } else {
        let w = stehfest_weights(cfg.stehfest_terms);
        let st = finish(
            t,
            t.iter().map(|&ti| stehfest(fhat, ti, &w)).collect(),
            InversionMethod::Stehfest,
        );
        // a grid that does not cover the mass fails both checks; then agreement decides
        let scale = st.f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let agree = tal.f.iter().zip(&st.f).skip(1).all(|(a, b)| (a - b).abs() <= 1e-4 * scale);
        if !agree && miss(&st) < miss(&tal) {
            st
        } else {
            tal
        }
    };
    if let Some(tol) = cfg.mass_tolerance {
        if !((best.mass - 1.0).abs() <= tol) {
            return Err(Error::Inversion(format!(
                "inverted density has mass {} over [{}, {}]",
                best.mass,
                t[0],
                t[t.len() - 1]
            )));
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::ResetSpec;

    fn exp_lt(s: Complex64) -> Complex64 {
        Complex64::new(1.0, 0.0) / (s + 1.0)
    }

    #[test]
    fn truncated_grid_keeps_talbot() {
        let t: Vec<f64> = (0..=500).map(|i| 0.5 + i as f64 * 0.01).collect();
        let cfg = InversionConfig {
            mass_tolerance: None,
            ..Default::default()
        };
        let inv = laplace_invert_with(&exp_lt, &t, &cfg).unwrap();
        assert_eq!(inv.method, InversionMethod::Talbot);
        let err = t.iter().zip(&inv.f).map(|(t, f)| (f - (-t).exp()).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
        assert!(laplace_invert(&exp_lt, &t).is_err());
    }

    #[test]
    fn finite_difference_moments_fallback() {
        let raw = fd_moments(&exp_lt, 4).unwrap();
        for (k, got) in raw.iter().enumerate() {
            let want: f64 = (1..=k + 1).map(|i| i as f64).product();
            assert!((got / want - 1.0).abs() < 2e-5, "order {}: {got}", k + 1);
        }
        let g2 = |s: Complex64| Complex64::new(1.0, 0.0) / ((s + 1.0) * (s + 1.0));
        let raw = fd_moments(&g2, 4).unwrap();
        for (got, want) in raw.iter().zip([2.0, 6.0, 24.0, 120.0]) {
            assert!((got / want - 1.0).abs() < 2e-5, "{got} vs {want}");
        }
    }

    #[test]
    fn exponential_moments() {
        let m = moments_from_lt(&exp_lt, 4).unwrap();
        assert_eq!(m.method, MomentMethod::Contour);
        assert!((m.mean - 1.0).abs() < 1e-10);
        assert!((m.variance.unwrap() - 1.0).abs() < 1e-10);
        assert!((m.skewness.unwrap() - 2.0).abs() < 1e-9);
        assert!((m.excess_kurtosis.unwrap() - 6.0).abs() < 1e-8);
    }

    #[test]
    fn gamma_moments() {
        let (a, th): (f64, f64) = (2.5, 1.7);
        let f = move |s: Complex64| (Complex64::new(th, 0.0) / (s + th)).powf(a);
        let m = moments_from_lt(&f, 4).unwrap();
        let raw = [
            a / th,
            a * (a + 1.0) / th.powi(2),
            a * (a + 1.0) * (a + 2.0) / th.powi(3),
            a * (a + 1.0) * (a + 2.0) * (a + 3.0) / th.powi(4),
        ];
        for (got, want) in m.raw.iter().zip(raw) {
            assert!((got / want - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn degenerate_law_has_zero_moments() {
        let one = |_s: Complex64| Complex64::new(1.0, 0.0);
        let m = moments_from_lt(&one, 4).unwrap();
        assert!(m.raw.iter().all(|v| *v == 0.0));
        assert_eq!(m.skewness, None);
    }

    #[test]
    fn passage_moments_match_closed_mean() {
        let g = DensityFamily::exponential(1.0).unwrap();
        let f = PassageTransform::random_initial(g.clone(), 0.0, 1.0, 1.0);
        let m = moments_from_lt(&f, 4).unwrap();
        let want = crate::forward::mean_fpt_case1(&g, 0.0, &ResetSpec::fixed(1.0, 1.0))
            .unwrap()
            .value;
        assert!((m.mean - want).abs() < 1e-10, "{} {want}", m.mean);
    }

    #[test]
    fn known_pairs_invert() {
        let t: Vec<f64> = (0..=1000).map(|i| i as f64 * 0.01).collect();
        let inv = laplace_invert_with(
            &exp_lt,
            &t,
            &InversionConfig {
                mass_tolerance: Some(1e-2),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(inv.method, InversionMethod::Talbot);
        for (ti, fi) in t.iter().zip(&inv.f) {
            assert!((fi - (-ti).exp()).abs() < 1e-6, "{ti}: {fi}");
        }
        let sq = |s: Complex64| {
            let v = Complex64::new(1.0, 0.0) / (s + 1.0);
            v * v
        };
        let inv = laplace_invert(&sq, &t).unwrap();
        for (ti, fi) in t.iter().zip(&inv.f) {
            assert!((fi - ti * (-ti).exp()).abs() < 1e-6, "{ti}: {fi}");
        }
    }

    #[test]
    fn stehfest_fallback_is_rough_but_close() {
        let w = stehfest_weights(18);
        assert!((w.iter().sum::<f64>()).abs() < 1e-3);
        let v = stehfest(&exp_lt, 1.0, &w);
        assert!((v - (-1.0f64).exp()).abs() < 1e-4);
    }

    #[test]
    fn ghat_round_trip() {
        let g = DensityFamily::exponential(2.0).unwrap();
        let (mu, r, x_r) = (0.0, 1.0, 1.0);
        let f = PassageTransform::random_initial(g.clone(), mu, r, x_r);
        let root = 2f64.sqrt();
        for i in 0..20 {
            let th = root + 1e-3 + i as f64;
            let got = ifpt_ghat_from_fhat(th, &f, mu, r, x_r).unwrap();
            assert!((got - g.laplace(th).unwrap()).abs() < 1e-8);
        }
        assert!(matches!(
            ifpt_ghat_from_fhat(root + 5e-7, &f, mu, r, x_r),
            Err(Error::Singularity(_))
        ));
        assert!(matches!(ifpt_ghat_from_fhat(0.5, &f, mu, r, x_r), Err(Error::Domain(_))));
    }

    #[test]
    fn bad_transform_rejected() {
        let half = |_s: Complex64| Complex64::new(0.5, 0.0);
        assert!(matches!(moments_from_lt(&half, 2), Err(Error::Domain(_))));
        assert!(matches!(laplace_invert(&half, &[0.0, 1.0]), Err(Error::Domain(_))));
    }
}
