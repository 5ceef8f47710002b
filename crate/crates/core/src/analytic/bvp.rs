//! Finite-difference solver for the nonlocal problems
//! `½σ²f'' + μf' + r(f(x_R) - f) = s` on `(lo, hi)` with Dirichlet data,
//! `s = 0` for the exit probability and `s = -1` for the mean exit time.
//!
//! The nonlocal term is removed by superposition: `f = u + κw` where `u`
//! solves the local problem with the boundary data and `w` solves it with
//! forcing `-r` and zero boundary data, so `κ = u(x_R) / (1 - w(x_R))`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::model::{DiffusionModel, Interval, ResetSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BvpTarget {
    ExitProbability,
    MeanExitTime,
}

impl BvpTarget {
    fn forcing(self) -> f64 {
        match self {
            BvpTarget::ExitProbability => 0.0,
            BvpTarget::MeanExitTime => -1.0,
        }
    }

    /// Boundary values `(f(lo), f(hi))` of the standard problem.
    pub fn default_boundary(self) -> (f64, f64) {
        match self {
            BvpTarget::ExitProbability => (1.0, 0.0),
            BvpTarget::MeanExitTime => (0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvpConfig {
    pub min_intervals: usize,
    pub max_intervals: usize,
    /// Stop once doubling changes the solution by less than this (sup norm).
    pub tol: f64,
    pub residual_tol: f64,
}

impl Default for BvpConfig {
    fn default() -> Self {
        Self {
            min_intervals: 64,
            max_intervals: 1 << 16,
            tol: 1e-8,
            residual_tol: 1e-6,
        }
    }
}

/// A solution sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridFunction {
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    /// The solver's value of `f(x_R)`.
    pub kappa: f64,
    /// Grid index of `x_R` when it is a node.
    pub reset_index: Option<usize>,
    /// Scaled sup-norm residual of the discrete equations.
    pub residual: f64,
    /// `|f(x_R) - κ|`.
    pub nonlocal_gap: f64,
    pub observed_order: Option<f64>,
    pub converged: bool,
    pub estimated_error: f64,
}

impl GridFunction {
    pub fn intervals(&self) -> usize {
        self.x.len() - 1
    }

    /// Piecewise-cubic interpolation of the grid values.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (lo, hi) = (self.x[0], self.x[self.x.len() - 1]);
        if !(x >= lo - 1e-12 * (hi - lo) && x <= hi + 1e-12 * (hi - lo)) {
            return Err(Error::domain(format!("x = {x} outside [{lo}, {hi}]")));
        }
        Ok(cubic_uniform(lo, (hi - lo) / self.intervals() as f64, &self.f, x))
    }

    /// `x,f` rows at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,f\n");
        for (x, f) in self.x.iter().zip(&self.f) {
            s.push_str(&format!("{x:.16e},{f:.16e}\n"));
        }
        s
    }
}

/// Four-point Lagrange interpolation on a uniform grid.
pub(crate) fn cubic_uniform(lo: f64, h: f64, v: &[f64], x: f64) -> f64 {
    let n = v.len() - 1;
    let t = (x - lo) / h;
    let i = (t.floor() as isize).clamp(0, n as isize - 1) as usize;
    if n < 3 {
        let s = t - i as f64;
        return v[i] + s * (v[i + 1] - v[i]);
    }
    let j = i.saturating_sub(1).min(n - 3);
    let s = t - j as f64;
    let (f0, f1, f2, f3) = (v[j], v[j + 1], v[j + 2], v[j + 3]);
    -f0 * (s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0 + f1 * s * (s - 2.0) * (s - 3.0) / 2.0
        - f2 * s * (s - 1.0) * (s - 3.0) / 2.0
        + f3 * s * (s - 1.0) * (s - 2.0) / 6.0
}

/// Smallest denominator `q <= 4096` with `p/q` equal to `t` to 1e-12.
fn rational_denominator(t: f64) -> Option<usize> {
    (1..=4096usize).find(|&q| {
        let p = (t * q as f64).round();
        (p / q as f64 - t).abs() < 1e-12
    })
}

struct Level {
    f: Vec<f64>,
    kappa: f64,
    residual: f64,
    gap: f64,
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let m = diag.len();
    let mut c = vec![0.0; m];
    let mut d = vec![0.0; m];
    let mut piv = diag[0];
    for i in 0..m {
        if i > 0 {
            piv = diag[i] - sub[i] * c[i - 1];
        }
        if piv == 0.0 || !piv.is_finite() {
            return Err(Error::Solver {
                message: format!("singular tridiagonal system at row {i}"),
                residual: f64::INFINITY,
            });
        }
        c[i] = sup[i] / piv;
        d[i] = (rhs[i] - if i > 0 { sub[i] * d[i - 1] } else { 0.0 }) / piv;
    }
    for i in (0..m - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

#[allow(clippy::too_many_arguments)]
fn solve_level(
    model: &DiffusionModel,
    iv: &Interval,
    r: f64,
    x_r: f64,
    target: BvpTarget,
    boundary: (f64, f64),
    n: usize,
    reset_index: Option<usize>,
) -> Result<Level> {
    let h = iv.width() / n as f64;
    let m = n - 1;
    let (mut sub, mut diag, mut sup) = (vec![0.0; m], vec![0.0; m], vec![0.0; m]);
    for k in 0..m {
        let x = iv.lo + (k + 1) as f64 * h;
        let s = model.diffusion(x);
        let mu = model.drift(x);
        let a = 0.5 * s * s;
        if !(a > 0.0) || !a.is_finite() || !mu.is_finite() {
            return Err(Error::domain(format!(
                "coefficients invalid at x = {x}: drift {mu}, diffusion {s}"
            )));
        }
        sub[k] = a / (h * h) - mu / (2.0 * h);
        diag[k] = -2.0 * a / (h * h) - r;
        sup[k] = a / (h * h) + mu / (2.0 * h);
    }
    let s = target.forcing();
    let mut rhs_u = vec![s; m];
    rhs_u[0] -= sub[0] * boundary.0;
    rhs_u[m - 1] -= sup[m - 1] * boundary.1;
    let u_in = thomas(&sub, &diag, &sup, &rhs_u)?;
    let w_in = thomas(&sub, &diag, &sup, &vec![-r; m])?;
    let mut u = Vec::with_capacity(n + 1);
    u.push(boundary.0);
    u.extend_from_slice(&u_in);
    u.push(boundary.1);
    let mut w = Vec::with_capacity(n + 1);
    w.push(0.0);
    w.extend_from_slice(&w_in);
    w.push(0.0);
    let at = |v: &[f64]| match reset_index {
        Some(i) => v[i],
        None => cubic_uniform(iv.lo, h, v, x_r),
    };
    let (u_r, w_r) = (at(&u), at(&w));
    let den = 1.0 - w_r;
    if den.abs() < 1e-14 || !den.is_finite() {
        return Err(Error::Solver {
            message: format!("nonlocal system singular: 1 - w(x_R) = {den}"),
            residual: f64::INFINITY,
        });
    }
    let kappa = if r == 0.0 { u_r } else { u_r / den };
    let f: Vec<f64> = u.iter().zip(&w).map(|(u, w)| u + kappa * w).collect();
    let fmax = f.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let rhs = s - r * kappa;
    let mut residual: f64 = 0.0;
    for k in 0..m {
        let i = k + 1;
        let res = sub[k] * f[i - 1] + diag[k] * f[i] + sup[k] * f[i + 1] - rhs;
        let scale = (sub[k].abs() + diag[k].abs() + sup[k].abs()) * fmax + rhs.abs();
        residual = residual.max(res.abs() / scale);
    }
    let gap = (at(&f) - kappa).abs();
    Ok(Level {
        f,
        kappa,
        residual,
        gap,
    })
}

/// Solve the nonlocal BVP with grid doubling.
pub fn bvp_solve(
    model: &DiffusionModel,
    interval: &Interval,
    reset: &ResetSpec,
    target: BvpTarget,
    boundary: (f64, f64),
) -> Result<GridFunction> {
    bvp_solve_with(model, interval, reset, target, boundary, &BvpConfig::default())
}

pub fn bvp_solve_with(
    model: &DiffusionModel,
    interval: &Interval,
    reset: &ResetSpec,
    target: BvpTarget,
    boundary: (f64, f64),
    cfg: &BvpConfig,
) -> Result<GridFunction> {
    model.validate()?;
    interval.validate()?;
    reset.validate()?;
    for x in [interval.lo, interval.hi] {
        let s = model.diffusion(x);
        if !(s > 0.0 && s.is_finite()) {
            return Err(Error::domain(format!(
                "diffusion coefficient {s} at the endpoint x = {x}; it must stay positive on the closed interval"
            )));
        }
    }
    let r = reset.rate;
    let x_r = reset.fixed_position()?;
    if r > 0.0 && !interval.contains_open(x_r) {
        return Err(Error::domain(format!(
            "reset position {x_r} outside ({}, {})",
            interval.lo, interval.hi
        )));
    }
    let t = (x_r - interval.lo) / interval.width();
    let q = rational_denominator(t);
    let mut n = q.unwrap_or(1);
    while n < cfg.min_intervals.max(4) {
        n *= 2;
    }
    let node = |n: usize| q.map(|q| (t * q as f64).round() as usize * (n / q));

    let mut prev: Option<Level> = None;
    let mut changes: Vec<f64> = Vec::new();
    loop {
        let level = solve_level(model, interval, r, x_r, target, boundary, n, node(n))?;
        if level.residual > cfg.residual_tol {
            return Err(Error::Solver {
                message: format!("discrete residual too large on {n} intervals"),
                residual: level.residual,
            });
        }
        if let Some(p) = &prev {
            let change = p
                .f
                .iter()
                .enumerate()
                .map(|(i, v)| (level.f[2 * i] - v).abs())
                .fold(0.0, f64::max);
            changes.push(change);
        }
        let done = changes.len() >= 2 && *changes.last().unwrap() < cfg.tol;
        if done || 2 * n > cfg.max_intervals {
            let k = changes.len();
            let observed_order = if k >= 2 && changes[k - 1] > 0.0 {
                Some((changes[k - 2] / changes[k - 1]).log2())
            } else {
                None
            };
            let last = changes.last().copied().unwrap_or(f64::INFINITY);
            let h = interval.width() / n as f64;
            let x = (0..=n).map(|i| interval.lo + i as f64 * h).collect();
            return Ok(GridFunction {
                x,
                f: level.f,
                kappa: level.kappa,
                reset_index: node(n),
                residual: level.residual,
                nonlocal_gap: level.gap,
                observed_order,
                converged: done,
                estimated_error: last / 3.0,
            });
        }
        prev = Some(level);
        n *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::bm::BmResetCoefficients;
    use crate::analytic::model::Coefficient;

    fn sup_err(g: &GridFunction, exact: impl Fn(f64) -> f64) -> f64 {
        g.x.iter().zip(&g.f).map(|(&x, &f)| (f - exact(x)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn brownian_matches_closed_forms() {
        for &(mu, r, x_r, b) in &[(0.0, 1.0, 0.5, 1.0), (0.7, 2.0, 0.3, 1.0), (-1.2, 0.5, 1.3, 2.0)] {
            let c = BmResetCoefficients::new(mu, r, x_r, b).unwrap();
            let m = DiffusionModel::brownian(mu);
            let iv = Interval::unit(b).unwrap();
            let reset = ResetSpec::fixed(r, x_r);
            let p = bvp_solve(&m, &iv, &reset, BvpTarget::ExitProbability, (1.0, 0.0)).unwrap();
            assert!(p.converged);
            assert!(sup_err(&p, |x| c.pi0(x).unwrap()) < 1e-6);
            assert!(p.nonlocal_gap < 1e-10);
            assert!((p.kappa - c.pi0_at_reset).abs() < 1e-6);
            let e = bvp_solve(&m, &iv, &reset, BvpTarget::MeanExitTime, (0.0, 0.0)).unwrap();
            assert!(sup_err(&e, |x| c.mean_fet(x).unwrap()) < 1e-6);
        }
    }

    #[test]
    fn fixed_grid_order() {
        let c = BmResetCoefficients::new(0.4, 1.0, 0.25, 1.0).unwrap();
        let cfg = BvpConfig {
            min_intervals: 1 << 10,
            max_intervals: 1 << 12,
            tol: 0.0,
            residual_tol: 1e-6,
        };
        let g = bvp_solve_with(
            &DiffusionModel::brownian(0.4),
            &Interval::unit(1.0).unwrap(),
            &ResetSpec::fixed(1.0, 0.25),
            BvpTarget::ExitProbability,
            (1.0, 0.0),
            &cfg,
        )
        .unwrap();
        assert_eq!(g.intervals(), 1 << 12);
        assert!(sup_err(&g, |x| c.pi0(x).unwrap()) < 1e-6);
        assert!(g.observed_order.unwrap() > 1.9);
    }

    #[test]
    fn linear_pull_gives_linear_exit_probability() {
        let (r, x_r, b) = (1.5, 0.6, 2.0);
        let m = DiffusionModel::custom(
            Coefficient::Affine { slope: r, intercept: -r * x_r },
            Coefficient::Affine { slope: 0.3, intercept: 0.5 },
        )
        .unwrap();
        let g = bvp_solve(
            &m,
            &Interval::unit(b).unwrap(),
            &ResetSpec::fixed(r, x_r),
            BvpTarget::ExitProbability,
            (1.0, 0.0),
        )
        .unwrap();
        assert!(sup_err(&g, |x| 1.0 - x / b) < 1e-6);
    }

    #[test]
    fn exponential_drift_gives_two_minus_power() {
        let (r, x_r, sigma) = (1.3, 0.4, 0.8);
        let ln2 = std::f64::consts::LN_2;
        let a = r / ln2 - 0.5 * ln2 * sigma * sigma;
        let b = r / ln2 * 2f64.powf(x_r);
        let m = DiffusionModel::custom(
            Coefficient::ExpAffine { a, b: -b, rate: -ln2 },
            Coefficient::Constant { value: sigma },
        )
        .unwrap();
        let g = bvp_solve(
            &m,
            &Interval::unit(1.0).unwrap(),
            &ResetSpec::fixed(r, x_r),
            BvpTarget::ExitProbability,
            (1.0, 0.0),
        )
        .unwrap();
        assert!(sup_err(&g, |x| 2.0 - 2f64.powf(x)) < 1e-6);
    }

    #[test]
    fn degenerate_endpoint_is_rejected() {
        let e = bvp_solve(
            &DiffusionModel::Feller,
            &Interval::unit(1.0).unwrap(),
            &ResetSpec::fixed(1.0, 0.5),
            BvpTarget::ExitProbability,
            (1.0, 0.0),
        );
        assert!(matches!(e, Err(Error::Domain(_))));
        let ok = bvp_solve(
            &DiffusionModel::Feller,
            &Interval::new(0.1, 1.0).unwrap(),
            &ResetSpec::fixed(1.0, 0.5),
            BvpTarget::ExitProbability,
            (1.0, 0.0),
        );
        assert!(ok.unwrap().converged);
    }

    #[test]
    fn irrational_reset_point_is_interpolated() {
        let x_r = 1.0 / std::f64::consts::PI;
        let c = BmResetCoefficients::new(0.2, 1.0, x_r, 1.0).unwrap();
        let g = bvp_solve(
            &DiffusionModel::brownian(0.2),
            &Interval::unit(1.0).unwrap(),
            &ResetSpec::fixed(1.0, x_r),
            BvpTarget::ExitProbability,
            (1.0, 0.0),
        )
        .unwrap();
        assert!(g.reset_index.is_none());
        assert!(sup_err(&g, |x| c.pi0(x).unwrap()) < 1e-6);
        assert!((g.eval(0.123).unwrap() - c.pi0(0.123).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn rejects_degenerate_diffusion() {
        let m = DiffusionModel::custom(
            Coefficient::Constant { value: 0.0 },
            Coefficient::Constant { value: 0.0 },
        )
        .unwrap();
        let r = bvp_solve(
            &m,
            &Interval::unit(1.0).unwrap(),
            &ResetSpec::fixed(1.0, 0.5),
            BvpTarget::ExitProbability,
            (1.0, 0.0),
        );
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = bvp_solve(
            &DiffusionModel::brownian(0.0),
            &Interval::unit(1.0).unwrap(),
            &ResetSpec::fixed(1.0, 0.5),
            BvpTarget::ExitProbability,
            (1.0, 0.0),
        )
        .unwrap();
        let csv = g.to_csv();
        assert!(csv.starts_with("x,f\n"));
        assert_eq!(csv.lines().count(), g.x.len() + 1);
    }
}
