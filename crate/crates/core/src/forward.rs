//! Passage and exit functionals when either the starting point (case I) or the
//! reset position (case II) is random.
//!
//! Each functional has a closed route, built from the law's Laplace transform or
//! a closed antiderivative, and a quadrature route that mixes the fixed-point
//! kernel of [`crate::analytic`] against the law. The closed route is preferred
//! when it applies.

use serde::{Deserialize, Serialize};

use crate::analytic::bm::{fpt_lt_kernel, mean_fpt_kernel, passage_rate};
use crate::analytic::{
    bvp_solve, BmResetCoefficients, BvpTarget, ConjugationMap, DiffusionModel, Interval,
    ResetPosition, ResetSpec,
};
use crate::densities::{DensityFamily, FamilyKind};
use crate::error::{Error, Result};
use crate::quadrature::QuadConfig;

const SUPPORT_SLACK: f64 = 1e-12;
// Beyond this exponent the closed exit forms lose everything to overflow.
const MAX_CLOSED_EXPONENT: f64 = 600.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Route {
    #[serde(rename = "closed-form")]
    ClosedForm,
    #[serde(rename = "quadrature")]
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForwardValue {
    pub value: f64,
    pub error: f64,
    pub route: Route,
}

impl ForwardValue {
    fn closed(value: f64, error: f64) -> Self {
        ForwardValue {
            value,
            error,
            route: Route::ClosedForm,
        }
    }

    fn quad(value: f64, error: f64) -> Self {
        ForwardValue {
            value,
            error,
            route: Route::Quadrature,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ForwardOptions {
    /// Force a route; `None` picks the closed route when available.
    pub route: Option<Route>,
    pub quad: QuadConfig,
}

impl ForwardOptions {
    pub fn quadrature() -> Self {
        ForwardOptions {
            route: Some(Route::Quadrature),
            ..Default::default()
        }
    }

    pub fn closed_form() -> Self {
        ForwardOptions {
            route: Some(Route::ClosedForm),
            ..Default::default()
        }
    }

    fn allows_closed(&self) -> bool {
        self.route != Some(Route::Quadrature)
    }

    fn closed_unavailable(&self, what: &str) -> Result<()> {
        if self.route == Some(Route::ClosedForm) {
            Err(Error::domain(format!("no closed form for {what}")))
        } else {
            Ok(())
        }
    }
}

fn check_inside(law: &DensityFamily, lo: f64, hi: f64, strict_atoms: bool, who: &str) -> Result<()> {
    let (a, b) = law.support();
    let slack = SUPPORT_SLACK * (hi - lo).abs().max(1.0);
    let ok = if strict_atoms && law.is_discrete() {
        a > lo && b < hi
    } else {
        a >= lo - slack && b <= hi + slack
    };
    if ok {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{who} law supported on [{a}, {b}], needs to lie in ({lo}, {hi})"
        )))
    }
}

fn point_mass(law: &DensityFamily) -> Option<f64> {
    match law.kind() {
        FamilyKind::PointMass { x } => Some(*x),
        _ => None,
    }
}

fn uniform(law: &DensityFamily) -> Option<(f64, f64)> {
    match law.kind() {
        FamilyKind::Uniform { support } => Some((support[0], support[1])),
        FamilyKind::Beta {
            alpha,
            beta,
            support,
        } if *alpha == 1.0 && *beta == 1.0 => Some((support[0], support[1])),
        _ => None,
    }
}

fn exit_coefficients(mu: f64, reset: &ResetSpec, b: f64) -> Result<BmResetCoefficients> {
    reset.validate()?;
    BmResetCoefficients::new(mu, reset.rate, reset.fixed_position()?, b)
}

/// Exit probability through 0 from `(0, b)` when the start is drawn from `g`.
pub fn q_case1(g: &DensityFamily, mu: f64, reset: &ResetSpec, b: f64) -> Result<ForwardValue> {
    q_case1_with(g, mu, reset, b, &ForwardOptions::default())
}

pub fn q_case1_with(
    g: &DensityFamily,
    mu: f64,
    reset: &ResetSpec,
    b: f64,
    opts: &ForwardOptions,
) -> Result<ForwardValue> {
    let c = exit_coefficients(mu, reset, b)?;
    check_inside(g, 0.0, b, false, "initial-position")?;
    if let Some(x) = point_mass(g) {
        return Ok(ForwardValue::closed(c.pi0(x)?, 0.0));
    }
    if opts.allows_closed() && c.d2 * b < MAX_CLOSED_EXPONENT {
        // E[e^{dη}] = ĝ(-d)
        let l1 = g.laplace(-c.d1)?;
        let l2 = g.laplace(-c.d2)?;
        let e1 = (c.d1 * b).exp();
        let e2 = (c.d2 * b).exp();
        let v = c.c1 * (l1 - e1) + c.c2 * (l2 - e2);
        let scale = c.c1.abs() * (l1 + e1) + c.c2.abs() * (l2 + e2);
        if v.is_finite() {
            return Ok(ForwardValue::closed(v.clamp(0.0, 1.0), 8.0 * f64::EPSILON * scale));
        }
    }
    opts.closed_unavailable("this exit probability")?;
    let r = g.expect(|x| c.pi0(x).unwrap_or(f64::NAN), &opts.quad)?;
    Ok(ForwardValue::quad(r.value.clamp(0.0, 1.0), r.error))
}

/// Exit probability for a general diffusion on `interval`, mixing the grid
/// solution of the nonlocal boundary-value problem against `g`.
pub fn q_case1_general(
    g: &DensityFamily,
    model: &DiffusionModel,
    reset: &ResetSpec,
    interval: &Interval,
) -> Result<ForwardValue> {
    model.validate()?;
    interval.validate()?;
    check_inside(g, interval.lo, interval.hi, false, "initial-position")?;
    if let (Some(mu), true) = (model.bm_drift(), interval.lo == 0.0) {
        if reset.rate > 0.0 {
            return q_case1(g, mu, reset, interval.hi);
        }
    }
    let cfg = QuadConfig::default();
    if let (Some(map), true) = (model.conjugation(), interval.lo == 0.0) {
        if reset.rate > 0.0 && map != ConjugationMap::Identity {
            let x_r = reset.fixed_position()?;
            let r = reset.rate;
            let v_b = map.v(interval.hi);
            let c = BmResetCoefficients::new(0.0, r, map.v(x_r), v_b)?;
            let res = g.expect(|x| c.pi0(map.v(x).min(v_b)).unwrap_or(f64::NAN), &cfg)?;
            return Ok(ForwardValue::quad(res.value.clamp(0.0, 1.0), res.error));
        }
    }
    let grid = bvp_solve(
        model,
        interval,
        reset,
        BvpTarget::ExitProbability,
        BvpTarget::ExitProbability.default_boundary(),
    )?;
    let res = g.expect(|x| grid.eval(x).unwrap_or(f64::NAN), &cfg)?;
    Ok(ForwardValue::quad(
        res.value.clamp(0.0, 1.0),
        res.error + grid.estimated_error,
    ))
}

/// Exit probability for a diffusion conjugated to Brownian motion by `map`,
/// with `g_tilde` the law of `v(η)` on `(0, v(b))` and `reset` on the original scale.
pub fn q_case1_conjugated(
    g_tilde: &DensityFamily,
    map: ConjugationMap,
    reset: &ResetSpec,
    b: f64,
) -> Result<ForwardValue> {
    let x_r = reset.fixed_position()?;
    let (lo, hi) = map.domain();
    if !(b > lo && b <= hi) {
        return Err(Error::domain(format!("b = {b} outside the domain of the map")));
    }
    q_case1(g_tilde, 0.0, &ResetSpec::fixed(reset.rate, map.v(x_r)), map.v(b))
}

/// Exit probability through 0 from `x` when the reset position is drawn from `h`.
pub fn q_case2(h: &DensityFamily, x: f64, mu: f64, r: f64, b: f64) -> Result<ForwardValue> {
    q_case2_with(h, x, mu, r, b, &ForwardOptions::default())
}

pub fn q_case2_with(
    h: &DensityFamily,
    x: f64,
    mu: f64,
    r: f64,
    b: f64,
    opts: &ForwardOptions,
) -> Result<ForwardValue> {
    check_case2_exit(h, x, r, b)?;
    if let Some(u) = point_mass(h) {
        return Ok(ForwardValue::closed(
            BmResetCoefficients::new(mu, r, u, b)?.pi0(x)?,
            0.0,
        ));
    }
    if let (Some((lo, hi)), true) = (uniform(h), opts.allows_closed()) {
        if let Some(v) = q_case2_uniform(x, mu, r, b, lo, hi) {
            return Ok(ForwardValue::closed(v.clamp(0.0, 1.0), 1e-13));
        }
    }
    opts.closed_unavailable("this exit probability")?;
    let res = h.expect(
        |u| {
            BmResetCoefficients::new(mu, r, u, b)
                .and_then(|c| c.pi0(x))
                .unwrap_or(f64::NAN)
        },
        &opts.quad,
    )?;
    Ok(ForwardValue::quad(res.value.clamp(0.0, 1.0), res.error))
}

fn check_case2_exit(h: &DensityFamily, x: f64, r: f64, b: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("reset rate must be > 0, got {r}")));
    }
    if !(b > 0.0) {
        return Err(Error::domain(format!("b must be > 0, got {b}")));
    }
    if !(x >= 0.0 && x <= b) {
        return Err(Error::domain(format!("x = {x} outside [0, {b}]")));
    }
    check_inside(h, 0.0, b, true, "reset-position")
}

// π0 is (A - B y)/(C - D y) with y = e^{-k u}, k = d2 - d1, whose average over
// a uniform u has the elementary antiderivative ln(C e^{k u} - D) / (k C).
fn q_case2_uniform(x: f64, mu: f64, r: f64, b: f64, lo: f64, hi: f64) -> Option<f64> {
    let (d1, d2) = crate::analytic::bm::exponents(mu, r);
    if d2 * b > MAX_CLOSED_EXPONENT || -d1 * b > MAX_CLOSED_EXPONENT {
        return None;
    }
    let k = d2 - d1;
    let a = (d1 * x).exp() - (d1 * b).exp();
    let bb = (d2 * x).exp() - (d2 * b).exp();
    let c = -(d1 * b).exp_m1();
    let d = -(d2 * b).exp_m1();
    // ln(C e^{k u} - D) = k u + ln(C - D e^{-k u}); D < 0 so both terms are positive
    let ln_term = |u: f64| k * u + (c - d * (-k * u).exp()).ln();
    let avg = (ln_term(hi) - ln_term(lo)) / (k * (hi - lo));
    let v = bb / d + (a / c - bb / d) * avg;
    v.is_finite().then_some(v)
}

fn check_half_line(law: &DensityFamily, who: &str) -> Result<()> {
    let (a, _) = law.support();
    if a < 0.0 {
        Err(Error::domain(format!("{who} law reaches below the barrier at 0")))
    } else {
        Ok(())
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda >= 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("lambda must be finite and >= 0, got {lambda}")))
    }
}

fn half_line_reset(reset: &ResetSpec) -> Result<(f64, f64)> {
    reset.validate()?;
    let x_r = reset.fixed_position()?;
    if !(x_r >= 0.0) {
        return Err(Error::domain(format!("reset position must be >= 0, got {x_r}")));
    }
    Ok((reset.rate, x_r))
}

/// `E[e^{-λτ}]` for the passage through 0 when the start is drawn from `g`.
pub fn fpt_lt_case1(lambda: f64, g: &DensityFamily, mu: f64, reset: &ResetSpec) -> Result<ForwardValue> {
    fpt_lt_case1_with(lambda, g, mu, reset, &ForwardOptions::default())
}

pub fn fpt_lt_case1_with(
    lambda: f64,
    g: &DensityFamily,
    mu: f64,
    reset: &ResetSpec,
    opts: &ForwardOptions,
) -> Result<ForwardValue> {
    check_lambda(lambda)?;
    let (r, x_r) = half_line_reset(reset)?;
    check_half_line(g, "initial-position")?;
    if lambda == 0.0 && r > 0.0 {
        return Ok(ForwardValue::closed(1.0, 0.0));
    }
    if let Some(x) = point_mass(g) {
        return Ok(ForwardValue::closed(fpt_lt_kernel(lambda, x, mu, r, x_r), 0.0));
    }
    if opts.allows_closed() {
        let k = passage_rate(lambda, mu, r);
        let g_hat = g.laplace(k)?;
        let w = r * (-x_r * k).exp();
        let c = if r > 0.0 { w / (lambda + w) } else { 0.0 };
        let v = g_hat + c * (1.0 - g_hat);
        return Ok(ForwardValue::closed(v, 4.0 * f64::EPSILON));
    }
    let res = g.expect(|x| fpt_lt_kernel(lambda, x, mu, r, x_r), &opts.quad)?;
    Ok(ForwardValue::quad(res.value, res.error))
}

/// `E[e^{-λτ}]` from a fixed start `x` when the reset position is drawn from `h`.
pub fn fpt_lt_case2(lambda: f64, h: &DensityFamily, x: f64, mu: f64, r: f64) -> Result<ForwardValue> {
    fpt_lt_case2_with(lambda, h, x, mu, r, &ForwardOptions::default())
}

pub fn fpt_lt_case2_with(
    lambda: f64,
    h: &DensityFamily,
    x: f64,
    mu: f64,
    r: f64,
    opts: &ForwardOptions,
) -> Result<ForwardValue> {
    check_lambda(lambda)?;
    check_case2_half_line(h, x, r)?;
    if lambda == 0.0 {
        return Ok(ForwardValue::closed(1.0, 0.0));
    }
    if let Some(u) = point_mass(h) {
        return Ok(ForwardValue::closed(fpt_lt_kernel(lambda, x, mu, r, u), 0.0));
    }
    let k = passage_rate(lambda, mu, r);
    let e = (-x * k).exp();
    let one_minus_e = -(-x * k).exp_m1();
    if let (Some((lo, hi)), true) = (uniform(h), opts.allows_closed()) {
        // ∫ r e^{-ku}/(λ + r e^{-ku}) du = -(1/k) ln(λ + r e^{-ku})
        let avg = ((lambda + r * (-k * lo).exp()) / (lambda + r * (-k * hi).exp())).ln() / (k * (hi - lo));
        return Ok(ForwardValue::closed(e + one_minus_e * avg, 4.0 * f64::EPSILON));
    }
    opts.closed_unavailable("this passage transform")?;
    let res = h.expect(
        |u| {
            let w = r * (-u * k).exp();
            w / (lambda + w)
        },
        &opts.quad,
    )?;
    Ok(ForwardValue::quad(e + one_minus_e * res.value, one_minus_e * res.error))
}

fn check_case2_half_line(h: &DensityFamily, x: f64, r: f64) -> Result<()> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("reset rate must be > 0, got {r}")));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::domain(format!("start position must be finite and >= 0, got {x}")));
    }
    check_half_line(h, "reset-position")
}

/// Mean passage time through 0 when the start is drawn from `g`.
pub fn mean_fpt_case1(g: &DensityFamily, mu: f64, reset: &ResetSpec) -> Result<ForwardValue> {
    mean_fpt_case1_with(g, mu, reset, &ForwardOptions::default())
}

pub fn mean_fpt_case1_with(
    g: &DensityFamily,
    mu: f64,
    reset: &ResetSpec,
    opts: &ForwardOptions,
) -> Result<ForwardValue> {
    let (r, x_r) = half_line_reset(reset)?;
    if r == 0.0 {
        return Err(Error::domain("mean passage time needs r > 0"));
    }
    check_half_line(g, "initial-position")?;
    if let Some(x) = point_mass(g) {
        return Ok(ForwardValue::closed(mean_fpt_kernel(x, mu, r, x_r), 0.0));
    }
    let k = passage_rate(0.0, mu, r);
    let scale = (x_r * k).exp() / r;
    if opts.allows_closed() {
        let g_hat = g.laplace(k)?;
        let v = scale * (1.0 - g_hat);
        return Ok(ForwardValue::closed(v, 4.0 * f64::EPSILON * scale));
    }
    let res = g.expect(|x| mean_fpt_kernel(x, mu, r, x_r), &opts.quad)?;
    Ok(ForwardValue::quad(res.value, res.error))
}

/// Mean passage time through 0 from `x` when the reset position is drawn from `h`.
pub fn mean_fpt_case2(h: &DensityFamily, x: f64, mu: f64, r: f64) -> Result<ForwardValue> {
    mean_fpt_case2_with(h, x, mu, r, &ForwardOptions::default())
}

pub fn mean_fpt_case2_with(
    h: &DensityFamily,
    x: f64,
    mu: f64,
    r: f64,
    opts: &ForwardOptions,
) -> Result<ForwardValue> {
    check_case2_half_line(h, x, r)?;
    if let Some(u) = point_mass(h) {
        return Ok(ForwardValue::closed(mean_fpt_kernel(x, mu, r, u), 0.0));
    }
    let k = passage_rate(0.0, mu, r);
    if !(-k > h.laplace_abscissa()) {
        return Err(Error::domain(format!(
            "E[e^{{{k} x_R}}] diverges for the {} reset law",
            h.name()
        )));
    }
    let pre = -(-x * k).exp_m1() / r;
    if opts.allows_closed() {
        let mgf = h.laplace(-k)?;
        return Ok(ForwardValue::closed(pre * mgf, 4.0 * f64::EPSILON * pre * mgf));
    }
    let res = h.expect(|u| (k * u).exp(), &opts.quad)?;
    Ok(ForwardValue::quad(pre * res.value, pre * res.error))
}

/// Mean exit time from `(0, b)` when the start is drawn from `g`.
pub fn mean_fet_case1(g: &DensityFamily, mu: f64, reset: &ResetSpec, b: f64) -> Result<ForwardValue> {
    mean_fet_case1_with(g, mu, reset, b, &ForwardOptions::default())
}

pub fn mean_fet_case1_with(
    g: &DensityFamily,
    mu: f64,
    reset: &ResetSpec,
    b: f64,
    opts: &ForwardOptions,
) -> Result<ForwardValue> {
    let c = exit_coefficients(mu, reset, b)?;
    check_inside(g, 0.0, b, false, "initial-position")?;
    if let Some(x) = point_mass(g) {
        return Ok(ForwardValue::closed(c.mean_fet(x)?, 0.0));
    }
    if opts.allows_closed() && c.d2 * b < MAX_CLOSED_EXPONENT {
        let l1 = g.laplace(-c.d1)?;
        let l2 = g.laplace(-c.d2)?;
        let v = c.big_c1 * (l1 - 1.0) + c.big_c2 * (l2 - 1.0);
        let scale = c.big_c1.abs() * (l1 + 1.0) + c.big_c2.abs() * (l2 + 1.0);
        if v.is_finite() {
            return Ok(ForwardValue::closed(v.max(0.0), 8.0 * f64::EPSILON * scale));
        }
    }
    opts.closed_unavailable("this mean exit time")?;
    let res = g.expect(|x| c.mean_fet(x).unwrap_or(f64::NAN), &opts.quad)?;
    Ok(ForwardValue::quad(res.value, res.error))
}

/// Mean exit time for a general diffusion on `interval`, from the grid solution.
pub fn mean_fet_case1_general(
    g: &DensityFamily,
    model: &DiffusionModel,
    reset: &ResetSpec,
    interval: &Interval,
) -> Result<ForwardValue> {
    model.validate()?;
    interval.validate()?;
    check_inside(g, interval.lo, interval.hi, false, "initial-position")?;
    if let (Some(mu), true) = (model.bm_drift(), interval.lo == 0.0) {
        if reset.rate > 0.0 {
            return mean_fet_case1(g, mu, reset, interval.hi);
        }
    }
    if let (Some(map), true) = (model.conjugation(), interval.lo == 0.0) {
        if reset.rate > 0.0 && map != ConjugationMap::Identity {
            // v(X) is a Brownian motion in the same clock, so exit times carry over
            let v_b = map.v(interval.hi);
            let c = BmResetCoefficients::new(0.0, reset.rate, map.v(reset.fixed_position()?), v_b)?;
            let res = g.expect(|x| c.mean_fet(map.v(x).min(v_b)).unwrap_or(f64::NAN), &QuadConfig::default())?;
            return Ok(ForwardValue::quad(res.value, res.error));
        }
    }
    let grid = bvp_solve(
        model,
        interval,
        reset,
        BvpTarget::MeanExitTime,
        BvpTarget::MeanExitTime.default_boundary(),
    )?;
    let res = g.expect(|x| grid.eval(x).unwrap_or(f64::NAN), &QuadConfig::default())?;
    Ok(ForwardValue::quad(res.value, res.error + grid.estimated_error))
}

/// Mean exit time from `(0, b)` starting at `x` when the reset position is drawn from `h`.
pub fn mean_fet_case2(h: &DensityFamily, x: f64, mu: f64, r: f64, b: f64) -> Result<ForwardValue> {
    mean_fet_case2_with(h, x, mu, r, b, &ForwardOptions::default())
}

pub fn mean_fet_case2_with(
    h: &DensityFamily,
    x: f64,
    mu: f64,
    r: f64,
    b: f64,
    opts: &ForwardOptions,
) -> Result<ForwardValue> {
    check_case2_exit(h, x, r, b)?;
    if let Some(u) = point_mass(h) {
        return Ok(ForwardValue::closed(
            BmResetCoefficients::new(mu, r, u, b)?.mean_fet(x)?,
            0.0,
        ));
    }
    if let (Some((lo, hi)), true, true) = (uniform(h), mu == 0.0, opts.allows_closed()) {
        if let Some(v) = mean_fet_case2_uniform(x, r, b, lo, hi) {
            return Ok(ForwardValue::closed(v, 1e-13 * v.abs().max(1.0)));
        }
    }
    opts.closed_unavailable("this mean exit time")?;
    let res = h.expect(
        |u| {
            BmResetCoefficients::new(mu, r, u, b)
                .and_then(|c| c.mean_fet(x))
                .unwrap_or(f64::NAN)
        },
        &opts.quad,
    )?;
    Ok(ForwardValue::quad(res.value, res.error))
}

// Driftless case: the u-integrand e^{-su}/(C - D e^{-2su}) has an arctangent
// antiderivative since D < 0 < C.
fn mean_fet_case2_uniform(x: f64, r: f64, b: f64, lo: f64, hi: f64) -> Option<f64> {
    let s = (2.0 * r).sqrt();
    if s * b > MAX_CLOSED_EXPONENT {
        return None;
    }
    let c = -(-s * b).exp_m1();
    let d = -(s * b).exp_m1();
    let a = (-d / c).sqrt();
    let pre = (((-s * x).exp_m1()) * d - ((s * x).exp_m1()) * c) / r;
    let integral = ((a * (-s * lo).exp()).atan() - (a * (-s * hi).exp()).atan()) / (s * c * a);
    let v = pre * integral / (hi - lo);
    v.is_finite().then_some(v)
}

/// The functional a forward request asks for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ForwardTarget {
    ExitProbQ,
    MeanFpt,
    MeanFet,
    FptLt { lambda: Vec<f64> },
}

/// A batch forward evaluation.
///
/// `start` and `reset.position` are each fixed or random; exactly one of them
/// must be random. Passage targets put the barrier at 0 and take no interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForwardRequest {
    pub model: DiffusionModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interval: Option<Interval>,
    pub start: ResetPosition,
    pub reset: ResetSpec,
    pub target: ForwardTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForwardPoint {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    pub value: f64,
    pub error: f64,
    pub route: Route,
}

impl ForwardRequest {
    fn exit_interval(&self) -> Result<Interval> {
        let i = self
            .interval
            .ok_or_else(|| Error::domain("exit targets need an interval"))?;
        i.validate()?;
        Ok(i)
    }

    fn passage_drift(&self) -> Result<f64> {
        if self.interval.is_some() {
            return Err(Error::domain("passage targets are on the half-line; drop the interval"));
        }
        self.model
            .bm_drift()
            .ok_or_else(|| Error::domain("passage targets need a Brownian model"))
    }

    pub fn evaluate(&self) -> Result<Vec<ForwardPoint>> {
        self.model.validate()?;
        self.reset.validate()?;
        let point = |v: ForwardValue| ForwardPoint {
            lambda: None,
            value: v.value,
            error: v.error,
            route: v.route,
        };
        match (&self.start, &self.reset.position) {
            (ResetPosition::Random(g), ResetPosition::Fixed(_)) => match &self.target {
                ForwardTarget::ExitProbQ => {
                    let i = self.exit_interval()?;
                    Ok(vec![point(q_case1_general(g, &self.model, &self.reset, &i)?)])
                }
                ForwardTarget::MeanFet => {
                    let i = self.exit_interval()?;
                    Ok(vec![point(mean_fet_case1_general(g, &self.model, &self.reset, &i)?)])
                }
                ForwardTarget::MeanFpt => {
                    let mu = self.passage_drift()?;
                    Ok(vec![point(mean_fpt_case1(g, mu, &self.reset)?)])
                }
                ForwardTarget::FptLt { lambda } => {
                    let mu = self.passage_drift()?;
                    lambda
                        .iter()
                        .map(|&l| {
                            let v = fpt_lt_case1(l, g, mu, &self.reset)?;
                            Ok(ForwardPoint {
                                lambda: Some(l),
                                ..point(v)
                            })
                        })
                        .collect()
                }
            },
            (ResetPosition::Fixed(x), ResetPosition::Random(h)) => {
                let r = self.reset.rate;
                match &self.target {
                    ForwardTarget::ExitProbQ | ForwardTarget::MeanFet => {
                        let i = self.exit_interval()?;
                        let mu = self
                            .model
                            .bm_drift()
                            .ok_or_else(|| Error::domain("random reset positions need a Brownian model"))?;
                        if i.lo != 0.0 {
                            return Err(Error::domain("random reset positions need an interval starting at 0"));
                        }
                        let v = if self.target == ForwardTarget::ExitProbQ {
                            q_case2(h, *x, mu, r, i.hi)?
                        } else {
                            mean_fet_case2(h, *x, mu, r, i.hi)?
                        };
                        Ok(vec![point(v)])
                    }
                    ForwardTarget::MeanFpt => {
                        let mu = self.passage_drift()?;
                        Ok(vec![point(mean_fpt_case2(h, *x, mu, r)?)])
                    }
                    ForwardTarget::FptLt { lambda } => {
                        let mu = self.passage_drift()?;
                        lambda
                            .iter()
                            .map(|&l| {
                                let v = fpt_lt_case2(l, h, *x, mu, r)?;
                                Ok(ForwardPoint {
                                    lambda: Some(l),
                                    ..point(v)
                                })
                            })
                            .collect()
                    }
                }
            }
            _ => Err(Error::domain(
                "exactly one of the start and the reset position must be random",
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{fpt_lt_bm, mean_fet_bm, mean_fpt_bm, pi0_bm};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn uniform_exit_table() {
        let want = [
            (0.01, 0.568447),
            (0.125, 0.555411),
            (0.25, 0.538740),
            (0.5, 0.5),
            (0.75, 0.461260),
            (0.9, 0.441559),
        ];
        let g = DensityFamily::uniform(0.0, 1.0).unwrap();
        for (x_r, q) in want {
            let v = q_case1(&g, 0.0, &ResetSpec::fixed(1.0, x_r), 1.0).unwrap();
            assert_eq!(v.route, Route::ClosedForm);
            assert!((v.value - q).abs() < 1e-6, "{x_r}: {}", v.value);
        }
    }

    #[test]
    fn dual_routes_agree_case1() {
        let reset = ResetSpec::fixed(1.7, 0.35);
        let laws = [
            DensityFamily::beta(2.0, 3.0).unwrap(),
            DensityFamily::uniform(0.0, 1.0).unwrap(),
            DensityFamily::truncated_exponential(1.5, 1.0).unwrap(),
            DensityFamily::triangular(),
            DensityFamily::linear(0.8).unwrap(),
            DensityFamily::discrete_uniform(vec![0.0, 0.4, 1.0]).unwrap(),
        ];
        for g in &laws {
            for mu in [-0.7, 0.0, 1.3] {
                let a = q_case1(g, mu, &reset, 1.0).unwrap();
                let b = q_case1_with(g, mu, &reset, 1.0, &ForwardOptions::quadrature()).unwrap();
                assert!(close(a.value, b.value, 1e-8), "{} {mu}", g.name());
                let a = mean_fet_case1(g, mu, &reset, 1.0).unwrap();
                let b = mean_fet_case1_with(g, mu, &reset, 1.0, &ForwardOptions::quadrature()).unwrap();
                assert!(close(a.value, b.value, 1e-8), "{} {mu}", g.name());
            }
        }
        let half = [
            DensityFamily::exponential(1.3).unwrap(),
            DensityFamily::gamma(2.5, 2.0).unwrap(),
            DensityFamily::geometric(0.4).unwrap(),
            DensityFamily::poisson(2.0).unwrap(),
        ];
        for g in &half {
            for mu in [-0.5, 0.0, 0.8] {
                let a = mean_fpt_case1(g, mu, &reset).unwrap();
                let b = mean_fpt_case1_with(g, mu, &reset, &ForwardOptions::quadrature()).unwrap();
                assert!(close(a.value, b.value, 1e-8), "{} {mu}", g.name());
                for lambda in [0.01, 1.0, 30.0] {
                    let a = fpt_lt_case1(lambda, g, mu, &reset).unwrap();
                    let b = fpt_lt_case1_with(lambda, g, mu, &reset, &ForwardOptions::quadrature()).unwrap();
                    assert!(close(a.value, b.value, 1e-8), "{} {mu} {lambda}", g.name());
                }
            }
        }
    }

    #[test]
    fn dual_routes_agree_case2() {
        let h = DensityFamily::uniform(0.1, 0.8).unwrap();
        for mu in [-0.6, 0.0, 0.9] {
            let a = q_case2(&h, 0.3, mu, 2.0, 1.0).unwrap();
            let b = q_case2_with(&h, 0.3, mu, 2.0, 1.0, &ForwardOptions::quadrature()).unwrap();
            assert_eq!(a.route, Route::ClosedForm);
            assert!(close(a.value, b.value, 1e-9), "{mu}: {} {}", a.value, b.value);
            for lambda in [0.1, 2.0] {
                let a = fpt_lt_case2(lambda, &h, 0.3, mu, 2.0).unwrap();
                let b = fpt_lt_case2_with(lambda, &h, 0.3, mu, 2.0, &ForwardOptions::quadrature()).unwrap();
                assert!(close(a.value, b.value, 1e-9));
            }
        }
        let a = mean_fet_case2(&h, 0.3, 0.0, 2.0, 1.0).unwrap();
        let b = mean_fet_case2_with(&h, 0.3, 0.0, 2.0, 1.0, &ForwardOptions::quadrature()).unwrap();
        assert_eq!(a.route, Route::ClosedForm);
        assert!(close(a.value, b.value, 1e-9), "{} {}", a.value, b.value);
    }

    #[test]
    fn point_masses_reproduce_kernels() {
        let reset = ResetSpec::fixed(1.3, 0.4);
        let pm = DensityFamily::point_mass(0.7).unwrap();
        let eq = |a: f64, b: f64| assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0), "{a} {b}");
        eq(q_case1(&pm, 0.2, &reset, 1.0).unwrap().value, pi0_bm(0.7, 0.2, &reset, 1.0).unwrap());
        eq(
            mean_fet_case1(&pm, 0.2, &reset, 1.0).unwrap().value,
            mean_fet_bm(0.7, 0.2, &reset, 1.0).unwrap(),
        );
        eq(mean_fpt_case1(&pm, 0.2, &reset).unwrap().value, mean_fpt_bm(0.7, 0.2, &reset).unwrap());
        eq(
            fpt_lt_case1(0.9, &pm, 0.2, &reset).unwrap().value,
            fpt_lt_bm(0.9, 0.7, 0.2, &reset).unwrap(),
        );
        let h = DensityFamily::point_mass(0.4).unwrap();
        eq(q_case2(&h, 0.7, 0.2, 1.3, 1.0).unwrap().value, pi0_bm(0.7, 0.2, &reset, 1.0).unwrap());
        eq(
            mean_fet_case2(&h, 0.7, 0.2, 1.3, 1.0).unwrap().value,
            mean_fet_bm(0.7, 0.2, &reset, 1.0).unwrap(),
        );
        eq(mean_fpt_case2(&h, 0.7, 0.2, 1.3).unwrap().value, mean_fpt_bm(0.7, 0.2, &reset).unwrap());
        eq(
            fpt_lt_case2(0.9, &h, 0.7, 0.2, 1.3).unwrap().value,
            fpt_lt_bm(0.9, 0.7, 0.2, &reset).unwrap(),
        );
    }

    #[test]
    fn transforms_normalized_at_zero() {
        let reset = ResetSpec::fixed(1.0, 1.0);
        let g = DensityFamily::gamma(2.0, 1.0).unwrap();
        assert_eq!(fpt_lt_case1(0.0, &g, 0.3, &reset).unwrap().value, 1.0);
        assert_eq!(fpt_lt_case2(0.0, &g, 1.0, 0.3, 1.0).unwrap().value, 1.0);
    }

    #[test]
    fn exponential_start_transform() {
        let (nu, r, x_r): (f64, f64, f64) = (1.0, 1.0, 1.0);
        let g = DensityFamily::exponential(nu).unwrap();
        for lambda in [0.1, 1.0, 5.0] {
            let s = (2.0 * (lambda + r)).sqrt();
            let e = r * (-x_r * s).exp();
            let want = (lambda * nu / (nu + s) + e) / (lambda + e);
            let got = fpt_lt_case1(lambda, &g, 0.0, &ResetSpec::fixed(r, x_r)).unwrap().value;
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn uniform_reset_closed_forms() {
        let (r, x): (f64, f64) = (1.5, 0.8);
        let s = (2.0 * r).sqrt();
        let h = DensityFamily::uniform(0.0, x).unwrap();
        let m = mean_fpt_case2(&h, x, 0.0, r).unwrap().value;
        let want = 2.0 / (r * x * s) * ((x * s).cosh() - 1.0);
        assert!((m - want).abs() < 1e-12 * want);
        let lambda = 0.7;
        let k = (2.0 * (lambda + r)).sqrt();
        let want = (-x * k).exp()
            + (1.0 - (-x * k).exp()) / (x * k) * ((lambda + r) / (lambda + r * (-x * k).exp())).ln();
        let got = fpt_lt_case2(lambda, &h, x, 0.0, r).unwrap().value;
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn divergent_reset_mgf_is_domain_error() {
        let h = DensityFamily::gamma(2.0, 1.0).unwrap();
        assert!(matches!(mean_fpt_case2(&h, 1.0, 0.0, 1.0), Err(Error::Domain(_))));
        assert!(mean_fpt_case2(&h, 1.0, 0.0, 0.3).is_ok());
    }

    #[test]
    fn support_violations() {
        let g = DensityFamily::uniform(0.0, 2.0).unwrap();
        assert!(matches!(q_case1(&g, 0.0, &ResetSpec::fixed(1.0, 0.5), 1.0), Err(Error::Domain(_))));
        let h = DensityFamily::discrete_uniform(vec![0.0, 0.5]).unwrap();
        assert!(matches!(q_case2(&h, 0.3, 0.0, 1.0, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn symmetric_reset_law_gives_half() {
        let h = DensityFamily::beta(2.0, 2.0).unwrap();
        let v = q_case2(&h, 0.5, 0.0, 1.0, 1.0).unwrap().value;
        assert!((v - 0.5).abs() < 1e-10);
    }

    #[test]
    fn request_round_trip_and_dispatch() {
        let req = ForwardRequest {
            model: DiffusionModel::brownian(0.0),
            interval: Some(Interval::unit(1.0).unwrap()),
            start: ResetPosition::Random(DensityFamily::uniform(0.0, 1.0).unwrap()),
            reset: ResetSpec::fixed(1.0, 0.5),
            target: ForwardTarget::ExitProbQ,
        };
        let s = serde_json::to_string(&req).unwrap();
        let back: ForwardRequest = serde_json::from_str(&s).unwrap();
        assert_eq!(back, req);
        let out = req.evaluate().unwrap();
        assert!((out[0].value - 0.5).abs() < 1e-12);
        let mut both = req.clone();
        both.reset = ResetSpec::random(1.0, DensityFamily::uniform(0.0, 1.0).unwrap());
        assert!(matches!(both.evaluate(), Err(Error::Domain(_))));
        let lt = ForwardRequest {
            model: DiffusionModel::brownian(0.0),
            interval: None,
            start: ResetPosition::Random(DensityFamily::exponential(1.0).unwrap()),
            reset: ResetSpec::fixed(1.0, 1.0),
            target: ForwardTarget::FptLt {
                lambda: vec![0.0, 1.0],
            },
        };
        let out = lt.evaluate().unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].value, 1.0);
    }

    #[test]
    fn general_models() {
        let (r, x_r, b) = (1.0, 0.3, 1.0);
        let reset = ResetSpec::fixed(r, x_r);
        let pull = DiffusionModel::custom(
            crate::analytic::Coefficient::Affine {
                slope: r,
                intercept: -r * x_r,
            },
            crate::analytic::Coefficient::Constant { value: 0.7 },
        )
        .unwrap();
        let g = DensityFamily::scaled_beta(2.0, 3.0, b).unwrap();
        let v = q_case1_general(&g, &pull, &reset, &Interval::unit(b).unwrap()).unwrap();
        assert!((v.value - 0.6).abs() < 1e-6, "{}", v.value);
        let feller = q_case1_general(
            &DensityFamily::uniform(0.0, 0.25).unwrap(),
            &DiffusionModel::Feller,
            &reset,
            &Interval::unit(0.25).unwrap(),
        );
        let feller = feller.unwrap_err();
        assert!(matches!(feller, Error::Domain(_)));
    }

    #[test]
    fn feller_mean_exit_goes_through_conjugation() {
        let g = DensityFamily::uniform(0.0, 1.0).unwrap();
        let iv = Interval::unit(1.0).unwrap();
        let v = mean_fet_case1_general(&g, &DiffusionModel::Feller, &ResetSpec::fixed(1e-7, 0.5), &iv).unwrap();
        // without resetting 2 sqrt(X) is a BM on (0, 2): E[tau] = E[v (2 - v)] = 2/3
        assert!((v.value - 2.0 / 3.0).abs() < 1e-6, "{}", v.value);
        let v = mean_fet_case1_general(&g, &DiffusionModel::Feller, &ResetSpec::fixed(2.0, 0.5), &iv).unwrap();
        assert!((v.value - 0.714762926559).abs() < 1e-9, "{}", v.value);
    }
}
