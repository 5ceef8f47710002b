//! Bounded derivative-free minimization and bracketed scalar root finding.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::brent::BrentRoot;
use argmin::solver::neldermead::NelderMead;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simulate::PathRng;

/// Closed box `[lo_i, hi_i]` in parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bounds {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::domain("bounds need matching, nonempty endpoint lists"));
        }
        for (a, b) in lo.iter().zip(&hi) {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::domain(format!("invalid box side [{a}, {b}]")));
            }
        }
        Ok(Bounds { lo, hi })
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    fn to_param(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .enumerate()
            .map(|(i, v)| self.lo[i] + (self.hi[i] - self.lo[i]) * v.clamp(0.0, 1.0))
            .collect()
    }

    fn to_unit(&self, p: &[f64]) -> Vec<f64> {
        p.iter()
            .enumerate()
            .map(|(i, v)| ((v - self.lo[i]) / (self.hi[i] - self.lo[i])).clamp(0.0, 1.0))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimizeConfig {
    pub restarts: usize,
    pub iters_per_dim: u64,
    pub seed: u64,
    pub initial_step: f64,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        MinimizeConfig {
            restarts: 20,
            iters_per_dim: 150,
            seed: 0x5eed,
            initial_step: 0.15,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub params: Vec<f64>,
    pub value: f64,
    pub iterations: u64,
    pub evaluations: u64,
    pub restarts: usize,
    pub converged: bool,
}

struct UnitProblem<'a, F> {
    f: &'a F,
    bounds: &'a Bounds,
}

impl<F> CostFunction for UnitProblem<'_, F>
where
    F: Fn(&[f64]) -> f64,
{
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, u: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        // outside the box: value at the projection, inflated
        let d2: f64 = u.iter().map(|v| (v - v.clamp(0.0, 1.0)).powi(2)).sum();
        let v = (self.f)(&self.bounds.to_param(u));
        Ok(if v.is_nan() { f64::INFINITY } else { v * (1.0 + 1e3 * d2) + d2 * f64::MIN_POSITIVE })
    }
}

fn simplex(u0: &[f64], step: f64) -> Vec<Vec<f64>> {
    let mut pts = vec![u0.to_vec()];
    for i in 0..u0.len() {
        let mut p = u0.to_vec();
        p[i] += if p[i] + step <= 1.0 { step } else { -step };
        pts.push(p);
    }
    pts
}

fn nelder_mead<F>(f: &F, bounds: &Bounds, u0: &[f64], step: f64, iters: u64) -> Result<(Vec<f64>, f64, u64, u64)>
where
    F: Fn(&[f64]) -> f64,
{
    let solver = NelderMead::new(simplex(u0, step))
        .with_sd_tolerance(0.0)
        .map_err(|e| Error::domain(e.to_string()))?;
    let res = Executor::new(UnitProblem { f, bounds }, solver)
        .configure(|s| s.max_iters(iters))
        .run()
        .map_err(|e| Error::Optim {
            message: e.to_string(),
            best_parameters: bounds.to_param(u0),
            best_objective: f64::NAN,
        })?;
    let state = res.state();
    let best = state
        .get_best_param()
        .cloned()
        .unwrap_or_else(|| u0.to_vec());
    let evals = res
        .state()
        .get_func_counts()
        .get("cost_count")
        .copied()
        .unwrap_or(0);
    let u: Vec<f64> = best.iter().map(|v| v.clamp(0.0, 1.0)).collect();
    Ok((u.clone(), f(&bounds.to_param(&u)), state.get_iter(), evals))
}

/// Minimizes a nonnegative objective over a box with restarted Nelder–Mead.
///
/// The first start is `start` (clamped into the box); later starts are drawn
/// uniformly from the box with one counter-based stream per restart. A final
/// pass restarts from the best point with a small simplex.
pub fn minimize_box<F>(f: F, bounds: &Bounds, start: Option<&[f64]>, cfg: &MinimizeConfig) -> Result<Minimum>
where
    F: Fn(&[f64]) -> f64,
{
    let n = bounds.dim();
    let iters = cfg.iters_per_dim * n as u64;
    let mut best: Option<(Vec<f64>, f64)> = None;
    let mut iterations = 0;
    let mut evaluations = 0;
    for k in 0..cfg.restarts.max(1) {
        let u0 = match (k, start) {
            (0, Some(p)) => bounds.to_unit(p),
            _ => {
                let mut rng = PathRng::new(cfg.seed, k as u64);
                (0..n).map(|_| rng.random::<f64>()).collect()
            }
        };
        let (u, v, it, ev) = nelder_mead(&f, bounds, &u0, cfg.initial_step, iters)?;
        iterations += it;
        evaluations += ev;
        if best.as_ref().is_none_or(|(_, b)| v < *b) {
            best = Some((u, v));
        }
    }
    let (u, v) = best.expect("at least one restart");
    let (u2, v2, it, ev) = nelder_mead(&f, bounds, &u, 1e-3, iters)?;
    iterations += it;
    evaluations += ev;
    let (u, v) = if v2 <= v { (u2, v2) } else { (u, v) };
    if !v.is_finite() {
        return Err(Error::Optim {
            message: "objective not finite at any iterate".into(),
            best_parameters: bounds.to_param(&u),
            best_objective: v,
        });
    }
    Ok(Minimum {
        params: bounds.to_param(&u),
        value: v,
        iterations,
        evaluations,
        restarts: cfg.restarts.max(1),
        converged: true,
    })
}

/// True when the finite-difference Hessian at `p` (in unit-box coordinates) is
/// positive definite.
pub fn hessian_positive_definite<F>(f: F, bounds: &Bounds, p: &[f64]) -> bool
where
    F: Fn(&[f64]) -> f64,
{
    let n = bounds.dim();
    let h = 1e-4;
    let u = bounds.to_unit(p);
    let eval = |du: &[(usize, f64)]| {
        let mut v = u.clone();
        for (i, d) in du {
            v[*i] += d;
        }
        f(&v.iter()
            .enumerate()
            .map(|(i, x)| bounds.lo[i] + (bounds.hi[i] - bounds.lo[i]) * x)
            .collect::<Vec<_>>())
    };
    let f0 = eval(&[]);
    let mut hess = vec![vec![0.0; n]; n];
    for i in 0..n {
        hess[i][i] = (eval(&[(i, h)]) - 2.0 * f0 + eval(&[(i, -h)])) / (h * h);
        for j in 0..i {
            let v = (eval(&[(i, h), (j, h)]) - eval(&[(i, h), (j, -h)]) - eval(&[(i, -h), (j, h)])
                + eval(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    let scale = hess.iter().map(|r| r.iter().fold(0.0f64, |a, v| a.max(v.abs()))).fold(0.0, f64::max);
    if !(scale > 0.0 && scale.is_finite()) {
        return false;
    }
    // Cholesky with a relative pivot floor
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = hess[i][i] - s;
                if d <= 1e-8 * scale {
                    return false;
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (hess[i][j] - s) / l[j][j];
            }
        }
    }
    true
}

/// Forward map sampled across a one-parameter box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RangeScan {
    pub params: Vec<f64>,
    pub values: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub monotone: bool,
}

/// Interior points between the endpoints of a scan.
pub const SCAN_INTERIOR: usize = 64;

/// Evaluates `f` at both endpoints and 64 interior points, log-spaced when the
/// box spans more than two decades. Failed evaluations are skipped.
pub fn scan_range<F>(f: F, lo: f64, hi: f64) -> Result<RangeScan>
where
    F: Fn(f64) -> Result<f64>,
{
    let n = SCAN_INTERIOR + 2;
    let log = lo > 0.0 && hi / lo > 100.0;
    let mut params = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    let mut last_err = None;
    for i in 0..n {
        let t = i as f64 / (n - 1) as f64;
        let p = if log {
            (lo.ln() + t * (hi / lo).ln()).exp()
        } else {
            lo + t * (hi - lo)
        };
        let p = if i == n - 1 { hi } else { p };
        match f(p) {
            Ok(v) if v.is_finite() => {
                params.push(p);
                values.push(v);
            }
            Ok(v) => last_err = Some(Error::Numerical(format!("forward map returned {v} at {p}"))),
            Err(e) => last_err = Some(e),
        }
    }
    if values.len() < 2 {
        return Err(last_err.unwrap_or_else(|| Error::domain("forward map not evaluable on the box")));
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let slack = 1e-9 * min.abs().max(max.abs()).max(1e-300);
    let up = values.windows(2).all(|w| w[1] >= w[0] - slack);
    let down = values.windows(2).all(|w| w[1] <= w[0] + slack);
    Ok(RangeScan {
        params,
        values,
        min,
        max,
        monotone: up || down,
    })
}

struct Shifted<'a, F> {
    f: &'a F,
    target: f64,
}

impl<F> CostFunction for Shifted<'_, F>
where
    F: Fn(f64) -> Result<f64>,
{
    type Param = f64;
    type Output = f64;

    fn cost(&self, p: &f64) -> std::result::Result<f64, argmin::core::Error> {
        Ok((self.f)(*p)? - self.target)
    }
}

/// Root of `f(p) = target` in the first sign-changing cell of `scan`.
/// `None` when the scan shows no crossing.
pub fn bracketed_root<F>(f: F, target: f64, scan: &RangeScan) -> Result<Option<(f64, u64)>>
where
    F: Fn(f64) -> Result<f64>,
{
    let d: Vec<f64> = scan.values.iter().map(|v| v - target).collect();
    if let Some(i) = d.iter().position(|v| *v == 0.0) {
        return Ok(Some((scan.params[i], 0)));
    }
    let Some(i) = d.windows(2).position(|w| w[0] * w[1] < 0.0) else {
        return Ok(None);
    };
    let (a, b) = (scan.params[i], scan.params[i + 1]);
    let tol = 1e-15 * a.abs().max(b.abs()).max(1e-300);
    let res = Executor::new(Shifted { f: &f, target }, BrentRoot::new(a, b, tol))
        .configure(|s| s.max_iters(200))
        .run()
        .map_err(|e| Error::Optim {
            message: e.to_string(),
            best_parameters: vec![0.5 * (a + b)],
            best_objective: f64::NAN,
        })?;
    let state = res.state();
    let p = state.get_best_param().copied().unwrap_or(0.5 * (a + b));
    Ok(Some((p, state.get_iter())))
}
