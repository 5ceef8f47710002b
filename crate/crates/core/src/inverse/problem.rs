//! Inverse problems: find the law of the start or reset position that
//! reproduces a target exit probability, passage-time law, or mean time.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::optimize::{bracketed_root, hessian_positive_definite, minimize_box, scan_range, Bounds, MinimizeConfig};
use super::transform::{moments_from_lt, LaplaceTransform, PassageTransform};
use crate::analytic::{BmResetCoefficients, DiffusionModel, Interval, ResetSpec};
use crate::densities::DensityFamily;
use crate::error::{Error, Result};
use crate::forward::{
    mean_fet_case1_general, mean_fet_case2, mean_fpt_case1, mean_fpt_case2, q_case1_conjugated, q_case1_general,
    q_case2,
};

/// Default transform-matching grid size.
pub const LAMBDA_POINTS: usize = 32;
pub const LAMBDA_MIN: f64 = 1e-3;
pub const LAMBDA_MAX: f64 = 1e3;

/// Squared scalar mismatch below which a scalar problem counts as solved.
pub const SCALAR_EXACT: f64 = 1e-12;
/// Transform-matching objective below which the laws count as equal.
pub const TRANSFORM_EXACT: f64 = 1e-10;

/// `LAMBDA_POINTS` log-spaced values in `[LAMBDA_MIN, LAMBDA_MAX]`.
pub fn default_lambda_grid() -> Vec<f64> {
    let (a, b) = (LAMBDA_MIN.ln(), LAMBDA_MAX.ln());
    (0..LAMBDA_POINTS)
        .map(|j| (a + (b - a) * j as f64 / (LAMBDA_POINTS - 1) as f64).exp())
        .collect()
}

/// A transform supplied in code.
#[derive(Clone)]
pub struct TransformClosure(pub Arc<dyn LaplaceTransform>);

impl fmt::Debug for TransformClosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("TransformClosure(..)")
    }
}

impl PartialEq for TransformClosure {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

/// Target passage-time law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "representation", rename_all = "snake_case", deny_unknown_fields)]
pub enum FptLawSpec {
    /// Transform values on a λ-grid.
    Transform { lambda: Vec<f64>, values: Vec<f64> },
    /// The transform generated by a known start or reset law.
    Passage { law: PassageTransform },
    /// Draws of the passage time.
    EmpiricalSamples { samples: Vec<f64> },
    /// Raw moments `m_1..m_k`, `k ≤ 4`.
    MomentVector { moments: Vec<f64> },
    #[serde(skip)]
    Closure(TransformClosure),
}

impl FptLawSpec {
    pub fn closure(f: impl LaplaceTransform + 'static) -> Self {
        FptLawSpec::Closure(TransformClosure(Arc::new(f)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InverseKind {
    Ifpp { q: f64 },
    Ifpt { target: FptLawSpec },
    Imfpt { m: f64 },
    Imfet { m: f64 },
}

/// Which position is random.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    RandomInitial,
    RandomReset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeParam {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
    /// Parameters set to the same value.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tied: Vec<String>,
}

impl FreeParam {
    pub fn new(name: &str, lo: f64, hi: f64) -> Self {
        FreeParam {
            name: name.into(),
            lo,
            hi,
            tied: Vec::new(),
        }
    }

    pub fn tied_to(mut self, other: &str) -> Self {
        self.tied.push(other.into());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySearch {
    /// Fixed parameters and the starting point for the free ones.
    pub family: DensityFamily,
    #[serde(default)]
    pub free: Vec<FreeParam>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateSearch {
    pub candidates: Vec<DensityFamily>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SearchSpace {
    Family(FamilySearch),
    Candidates(CandidateSearch),
}

impl SearchSpace {
    pub fn family(family: DensityFamily, free: Vec<FreeParam>) -> Self {
        SearchSpace::Family(FamilySearch { family, free })
    }

    pub fn candidates(candidates: Vec<DensityFamily>) -> Self {
        SearchSpace::Candidates(CandidateSearch { candidates })
    }
}

fn default_model() -> DiffusionModel {
    DiffusionModel::brownian(0.0)
}

fn is_default_model(m: &DiffusionModel) -> bool {
    *m == default_model()
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InverseProblem {
    pub problem: InverseKind,
    pub case: Case,
    #[serde(default = "default_model", skip_serializing_if = "is_default_model")]
    pub model: DiffusionModel,
    pub r: f64,
    /// Right end of the interval `(0, b)`; absent for passage problems.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Fixed start (random-reset case).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    /// Fixed reset position (random-initial case).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_r: Option<f64>,
    /// The searched family is the law of `v(η)` for the model's conjugation map.
    #[serde(default, skip_serializing_if = "is_false")]
    pub conjugated_scale: bool,
    pub search: SearchSpace,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Exact,
    Approximate,
    NoSolutionInClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    PsiSquare,
    TransformL2,
    MomentMatch,
}

/// Evidence that no member of a one-parameter class reaches the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub target: f64,
    pub range: [f64; 2],
    pub monotone: bool,
    pub points: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Diagnostics {
    pub iterations: u64,
    pub evaluations: u64,
    pub converged: bool,
    pub restarts: usize,
    /// Local uniqueness within the searched class.
    pub unique: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<Certificate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

/// Forward quantity recomputed from the fitted law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Replay {
    pub quantity: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_abs_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InverseSolution {
    pub status: Status,
    pub family: DensityFamily,
    pub parameters: BTreeMap<String, f64>,
    pub residual: f64,
    pub objective: Objective,
    pub diagnostics: Diagnostics,
    pub replay: Replay,
}

enum Target {
    Scalar(f64),
    Grid { lambda: Vec<f64>, values: Vec<f64>, weights: Vec<f64> },
    Moments(Vec<f64>),
}

fn check_transform_at_zero(v: f64) -> Result<()> {
    if (v - 1.0).abs() > 1e-6 {
        return Err(Error::domain(format!("target transform at 0 is {v}, not 1")));
    }
    Ok(())
}

fn grid_target(lambda: Vec<f64>, values: Vec<f64>) -> Result<Target> {
    if lambda.is_empty() || lambda.len() != values.len() {
        return Err(Error::domain("transform target needs matching nonempty lambda and values"));
    }
    for (l, v) in lambda.iter().zip(&values) {
        if !(*l >= 0.0 && l.is_finite()) {
            return Err(Error::domain(format!("lambda = {l} must be finite and >= 0")));
        }
        if *l == 0.0 {
            check_transform_at_zero(*v)?;
        } else if !(*v > 0.0 && *v <= 1.0 + 1e-12) {
            return Err(Error::domain(format!("transform value {v} at lambda = {l} outside (0, 1]")));
        }
    }
    let weights = lambda.iter().map(|l| 1.0 / (1.0 + l)).collect();
    Ok(Target::Grid { lambda, values, weights })
}

impl FptLawSpec {
    fn prepare(&self) -> Result<Target> {
        match self {
            FptLawSpec::Transform { lambda, values } => grid_target(lambda.clone(), values.clone()),
            FptLawSpec::Passage { law } => {
                check_transform_at_zero(law.value(0.0)?)?;
                let lambda = default_lambda_grid();
                let values = lambda.iter().map(|l| law.value(*l)).collect::<Result<Vec<_>>>()?;
                grid_target(lambda, values)
            }
            FptLawSpec::Closure(c) => {
                check_transform_at_zero(c.0.eval_real(0.0))?;
                let lambda = default_lambda_grid();
                let values = lambda.iter().map(|l| c.0.eval_real(*l)).collect();
                grid_target(lambda, values)
            }
            FptLawSpec::EmpiricalSamples { samples } => {
                if samples.is_empty() || samples.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
                    return Err(Error::domain("samples must be finite, nonnegative and nonempty"));
                }
                let lambda = default_lambda_grid();
                let n = samples.len() as f64;
                let values = lambda
                    .iter()
                    .map(|l| samples.iter().map(|t| (-l * t).exp()).sum::<f64>() / n)
                    .collect();
                grid_target(lambda, values)
            }
            FptLawSpec::MomentVector { moments } => {
                if moments.is_empty() || moments.len() > 4 || moments.iter().any(|m| !m.is_finite()) {
                    return Err(Error::domain("moment vector needs 1 to 4 finite raw moments"));
                }
                if !(moments[0] > 0.0) {
                    return Err(Error::domain("first moment must be > 0"));
                }
                if moments.len() > 1 && !(moments[1] - moments[0] * moments[0] > 0.0) {
                    return Err(Error::domain("variance implied by the moments must be > 0"));
                }
                Ok(Target::Moments(moments.clone()))
            }
        }
    }
}

fn required(v: Option<f64>, what: &str) -> Result<f64> {
    v.ok_or_else(|| Error::domain(format!("this problem needs `{what}`")))
}

impl InverseProblem {
    fn bm_drift(&self) -> Result<f64> {
        self.model
            .bm_drift()
            .ok_or_else(|| Error::domain("this problem is only available for Brownian motion with drift"))
    }

    fn reset(&self) -> Result<ResetSpec> {
        Ok(ResetSpec::fixed(self.r, required(self.x_r, "x_r")?))
    }

    fn validate(&self) -> Result<()> {
        self.model.validate()?;
        if !(self.r > 0.0 && self.r.is_finite()) {
            return Err(Error::domain(format!("reset rate must be > 0, got {}", self.r)));
        }
        match &self.problem {
            InverseKind::Ifpp { q } if !(*q > 0.0 && *q < 1.0) => {
                return Err(Error::domain(format!("q must lie in (0,1), got {q}")))
            }
            InverseKind::Imfpt { m } | InverseKind::Imfet { m } if !(*m > 0.0 && m.is_finite()) => {
                return Err(Error::domain(format!("m must be > 0, got {m}")))
            }
            _ => {}
        }
        let exit = matches!(self.problem, InverseKind::Ifpp { .. } | InverseKind::Imfet { .. });
        if exit {
            required(self.b, "b")?;
        } else if self.b.is_some() {
            return Err(Error::domain("passage problems are on the half-line; drop `b`"));
        }
        match self.case {
            Case::RandomInitial => {
                required(self.x_r, "x_r")?;
                if self.x.is_some() {
                    return Err(Error::domain("random-initial problems take `x_r`, not `x`"));
                }
            }
            Case::RandomReset => {
                required(self.x, "x")?;
                if self.x_r.is_some() {
                    return Err(Error::domain("random-reset problems take `x`, not `x_r`"));
                }
            }
        }
        let general_ok = self.case == Case::RandomInitial && exit;
        if !general_ok {
            self.bm_drift()?;
        }
        if self.conjugated_scale {
            let ok = matches!(self.problem, InverseKind::Ifpp { .. })
                && self.case == Case::RandomInitial
                && self.model.conjugation().is_some();
            if !ok {
                return Err(Error::domain(
                    "conjugated_scale applies to random-initial exit problems of conjugated models",
                ));
            }
        }
        match &self.search {
            SearchSpace::Candidates(c) if c.candidates.is_empty() => {
                Err(Error::domain("candidate list is empty"))
            }
            SearchSpace::Family(f) => {
                let names: Vec<String> = f.family.params().into_iter().map(|(k, _)| k).collect();
                for p in &f.free {
                    for n in std::iter::once(&p.name).chain(&p.tied) {
                        if !names.contains(n) {
                            return Err(Error::domain(format!("{} has no free parameter `{n}`", f.family.name())));
                        }
                    }
                    if !(p.lo.is_finite() && p.hi.is_finite() && p.lo < p.hi) {
                        return Err(Error::domain(format!("invalid box [{}, {}] for `{}`", p.lo, p.hi, p.name)));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn scalar_forward(&self, g: &DensityFamily) -> Result<f64> {
        let v = match (&self.problem, self.case) {
            (InverseKind::Ifpp { .. }, Case::RandomInitial) => {
                let b = required(self.b, "b")?;
                if self.conjugated_scale {
                    let map = self.model.conjugation().expect("validated");
                    q_case1_conjugated(g, map, &self.reset()?, b)?
                } else {
                    q_case1_general(g, &self.model, &self.reset()?, &Interval::unit(b)?)?
                }
            }
            (InverseKind::Ifpp { .. }, Case::RandomReset) => {
                q_case2(g, required(self.x, "x")?, self.bm_drift()?, self.r, required(self.b, "b")?)?
            }
            (InverseKind::Imfpt { .. }, Case::RandomInitial) => mean_fpt_case1(g, self.bm_drift()?, &self.reset()?)?,
            (InverseKind::Imfpt { .. }, Case::RandomReset) => {
                mean_fpt_case2(g, required(self.x, "x")?, self.bm_drift()?, self.r)?
            }
            (InverseKind::Imfet { .. }, Case::RandomInitial) => {
                mean_fet_case1_general(g, &self.model, &self.reset()?, &Interval::unit(required(self.b, "b")?)?)?
            }
            (InverseKind::Imfet { .. }, Case::RandomReset) => mean_fet_case2(
                g,
                required(self.x, "x")?,
                self.bm_drift()?,
                self.r,
                required(self.b, "b")?,
            )?,
            (InverseKind::Ifpt { .. }, _) => return Err(Error::domain("passage-law problems have no scalar map")),
        };
        Ok(v.value)
    }

    fn passage(&self, g: &DensityFamily) -> Result<PassageTransform> {
        let mu = self.bm_drift()?;
        Ok(match self.case {
            Case::RandomInitial => PassageTransform::random_initial(g.clone(), mu, self.r, required(self.x_r, "x_r")?),
            Case::RandomReset => PassageTransform::random_reset(g.clone(), required(self.x, "x")?, mu, self.r),
        })
    }

    fn target(&self) -> Result<(Target, Objective)> {
        Ok(match &self.problem {
            InverseKind::Ifpp { q } => (Target::Scalar(*q), Objective::PsiSquare),
            InverseKind::Imfpt { m } | InverseKind::Imfet { m } => (Target::Scalar(*m), Objective::MomentMatch),
            InverseKind::Ifpt { target } => {
                let t = target.prepare()?;
                let o = if matches!(t, Target::Moments(_)) {
                    Objective::MomentMatch
                } else {
                    Objective::TransformL2
                };
                (t, o)
            }
        })
    }

    /// Objective at `g`; errors become `+∞` inside the optimizer.
    fn objective(&self, target: &Target, g: &DensityFamily) -> Result<f64> {
        match target {
            Target::Scalar(t) => Ok((t - self.scalar_forward(g)?).powi(2)),
            Target::Grid { lambda, values, weights } => {
                let p = self.passage(g)?;
                let mut s = 0.0;
                for ((l, v), w) in lambda.iter().zip(values).zip(weights) {
                    s += w * (v - p.value(*l)?).powi(2);
                }
                Ok(s)
            }
            Target::Moments(m) => {
                let p = self.passage(g)?;
                let got = moments_from_lt(&p, m.len())?;
                Ok(m.iter().zip(&got.raw).map(|(a, b)| ((b - a) / a).powi(2)).sum())
            }
        }
    }

    fn replay(&self, target: &Target, g: &DensityFamily) -> Replay {
        let quantity = match &self.problem {
            InverseKind::Ifpp { .. } => "exit_prob_q",
            InverseKind::Imfpt { .. } => "mean_fpt",
            InverseKind::Imfet { .. } => "mean_fet",
            InverseKind::Ifpt { .. } => "fpt_lt",
        }
        .to_string();
        match target {
            Target::Scalar(t) => Replay {
                quantity,
                target: Some(*t),
                value: self.scalar_forward(g).ok(),
                max_abs_deviation: None,
            },
            Target::Grid { lambda, values, .. } => Replay {
                quantity,
                target: None,
                value: None,
                max_abs_deviation: self.passage(g).ok().and_then(|p| {
                    lambda
                        .iter()
                        .zip(values)
                        .map(|(l, v)| p.value(*l).map(|m| (m - v).abs()))
                        .try_fold(0.0f64, |a, d| d.map(|d| a.max(d)))
                        .ok()
                }),
            },
            Target::Moments(m) => Replay {
                quantity: "mean_fpt".into(),
                target: Some(m[0]),
                value: self
                    .passage(g)
                    .ok()
                    .and_then(|p| moments_from_lt(&p, 1).ok())
                    .map(|mm| mm.mean),
                max_abs_deviation: None,
            },
        }
    }
}

fn with_values(search: &FamilySearch, p: &[f64]) -> Result<DensityFamily> {
    let mut g = search.family.clone();
    for (fp, v) in search.free.iter().zip(p) {
        g = g.with_param(&fp.name, *v)?;
        for t in &fp.tied {
            g = g.with_param(t, *v)?;
        }
    }
    Ok(g)
}

fn start_point(search: &FamilySearch) -> Vec<f64> {
    let params: BTreeMap<String, f64> = search.family.params().into_iter().collect();
    search.free.iter().map(|fp| params[&fp.name]).collect()
}

fn parameters(g: &DensityFamily) -> BTreeMap<String, f64> {
    g.params().into_iter().collect()
}

struct Fit {
    family: DensityFamily,
    residual: f64,
    diagnostics: Diagnostics,
}

fn exact_threshold(objective: Objective, target: &Target) -> f64 {
    match (objective, target) {
        (_, Target::Scalar(_)) => SCALAR_EXACT,
        (_, Target::Moments(_)) => SCALAR_EXACT,
        _ => TRANSFORM_EXACT,
    }
}

fn fit_candidates(p: &InverseProblem, target: &Target, list: &[DensityFamily]) -> Result<Fit> {
    let mut best: Option<(DensityFamily, f64)> = None;
    let mut last_err = None;
    for g in list {
        match p.objective(target, g) {
            Ok(v) if best.as_ref().is_none_or(|(_, b)| v < *b) => best = Some((g.clone(), v)),
            Ok(_) => {}
            Err(e) => last_err = Some(e),
        }
    }
    let (family, residual) = best.ok_or_else(|| last_err.expect("nonempty candidate list"))?;
    Ok(Fit {
        family,
        residual,
        diagnostics: Diagnostics {
            evaluations: list.len() as u64,
            converged: true,
            unique: false,
            ..Default::default()
        },
    })
}

fn fit_minimize(p: &InverseProblem, target: &Target, search: &FamilySearch, cfg: &MinimizeConfig) -> Result<Fit> {
    let bounds = Bounds::new(
        search.free.iter().map(|f| f.lo).collect(),
        search.free.iter().map(|f| f.hi).collect(),
    )?;
    let f = |x: &[f64]| {
        with_values(search, x)
            .and_then(|g| p.objective(target, &g))
            .unwrap_or(f64::INFINITY)
    };
    let start = start_point(search);
    let m = minimize_box(f, &bounds, Some(&start), cfg)?;
    let unique = hessian_positive_definite(f, &bounds, &m.params);
    Ok(Fit {
        family: with_values(search, &m.params)?,
        residual: m.value,
        diagnostics: Diagnostics {
            iterations: m.iterations,
            evaluations: m.evaluations,
            converged: m.converged,
            restarts: m.restarts,
            unique,
            ..Default::default()
        },
    })
}

enum Scalar1 {
    Fit(Fit),
    OutOfRange(Certificate, DensityFamily),
}

fn fit_scalar_1d(p: &InverseProblem, t: f64, search: &FamilySearch, cfg: &MinimizeConfig) -> Result<Scalar1> {
    let fp = &search.free[0];
    let forward = |v: f64| with_values(search, &[v]).and_then(|g| p.scalar_forward(&g));
    let scan = scan_range(forward, fp.lo, fp.hi)?;
    if let Some((root, iters)) = bracketed_root(forward, t, &scan)? {
        let family = with_values(search, &[root])?;
        let residual = (t - p.scalar_forward(&family)?).powi(2);
        return Ok(Scalar1::Fit(Fit {
            family,
            residual,
            diagnostics: Diagnostics {
                iterations: iters,
                evaluations: scan.values.len() as u64 + iters + 1,
                converged: true,
                restarts: 0,
                unique: scan.monotone && scan.max > scan.min,
                ..Default::default()
            },
        }));
    }
    if scan.monotone && (t < scan.min || t > scan.max) {
        let i = if (t - scan.min).abs() < (t - scan.max).abs() {
            scan.values.iter().position(|v| *v == scan.min)
        } else {
            scan.values.iter().position(|v| *v == scan.max)
        }
        .unwrap_or(0);
        let cert = Certificate {
            target: t,
            range: [scan.min, scan.max],
            monotone: true,
            points: scan.values.len(),
            message: format!(
                "`{}` over [{}, {}] reaches only [{}, {}]",
                fp.name, fp.lo, fp.hi, scan.min, scan.max
            ),
        };
        return Ok(Scalar1::OutOfRange(cert, with_values(search, &[scan.params[i]])?));
    }
    let target = Target::Scalar(t);
    fit_minimize(p, &target, search, cfg).map(Scalar1::Fit)
}

fn finish(p: &InverseProblem, target: &Target, objective: Objective, fit: Fit) -> InverseSolution {
    let status = if fit.residual < exact_threshold(objective, target) {
        Status::Exact
    } else {
        Status::Approximate
    };
    let mut diagnostics = fit.diagnostics;
    if status == Status::Approximate {
        diagnostics
            .warnings
            .push(format!("objective {:e} above the exact-match threshold", fit.residual));
    }
    InverseSolution {
        status,
        parameters: parameters(&fit.family),
        replay: p.replay(target, &fit.family),
        family: fit.family,
        residual: fit.residual,
        objective,
        diagnostics,
    }
}

/// Solves any inverse problem.
pub fn solve(problem: &InverseProblem) -> Result<InverseSolution> {
    solve_with(problem, &MinimizeConfig::default())
}

pub fn solve_with(problem: &InverseProblem, cfg: &MinimizeConfig) -> Result<InverseSolution> {
    problem.validate()?;
    let (target, objective) = problem.target()?;
    let fit = match (&problem.search, &target) {
        (SearchSpace::Candidates(c), _) => fit_candidates(problem, &target, &c.candidates)?,
        (SearchSpace::Family(f), _) if f.free.is_empty() => {
            fit_candidates(problem, &target, std::slice::from_ref(&f.family))?
        }
        (SearchSpace::Family(f), Target::Scalar(t)) if f.free.len() == 1 => {
            match fit_scalar_1d(problem, *t, f, cfg)? {
                Scalar1::Fit(fit) => fit,
                Scalar1::OutOfRange(cert, family) => {
                    if objective != Objective::PsiSquare {
                        return Err(Error::Range {
                            target: *t,
                            lo: cert.range[0],
                            hi: cert.range[1],
                        });
                    }
                    let residual = problem.objective(&target, &family)?;
                    return Ok(InverseSolution {
                        status: Status::NoSolutionInClass,
                        parameters: parameters(&family),
                        replay: problem.replay(&target, &family),
                        family,
                        residual,
                        objective,
                        diagnostics: Diagnostics {
                            evaluations: cert.points as u64,
                            converged: true,
                            certificate: Some(cert),
                            ..Default::default()
                        },
                    });
                }
            }
        }
        (SearchSpace::Family(f), _) => fit_minimize(problem, &target, f, cfg)?,
    };
    Ok(finish(problem, &target, objective, fit))
}

fn expect_kind(problem: &InverseProblem, ok: bool, what: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "expected a {what} problem, got {:?}",
            std::mem::discriminant(&problem.problem)
        )))
    }
}

/// Exit-probability problem: minimizes `Ψ = (q - E[π₀(η)])²`.
pub fn solve_ifpp(problem: &InverseProblem) -> Result<InverseSolution> {
    expect_kind(problem, matches!(problem.problem, InverseKind::Ifpp { .. }), "IFPP")?;
    solve(problem)
}

/// Passage-law problem: matches transforms on a λ-grid, or raw moments.
pub fn solve_ifpt(problem: &InverseProblem) -> Result<InverseSolution> {
    expect_kind(problem, matches!(problem.problem, InverseKind::Ifpt { .. }), "IFPT")?;
    solve(problem)
}

/// Mean passage-time problem.
pub fn solve_imfpt(problem: &InverseProblem) -> Result<InverseSolution> {
    expect_kind(problem, matches!(problem.problem, InverseKind::Imfpt { .. }), "IMFPT")?;
    solve(problem)
}

/// Mean exit-time problem.
pub fn solve_imfet(problem: &InverseProblem) -> Result<InverseSolution> {
    expect_kind(problem, matches!(problem.problem, InverseKind::Imfet { .. }), "IMFET")?;
    solve(problem)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearSolution {
    pub a1: f64,
    pub a0: f64,
    /// `a1 x + a0 ≥ 0` on `(0, 1)`.
    pub valid_density: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<&'static str>,
}

/// The unique `g(x) = a1 x + a0` on `(0, 1)` with `E[π₀(η)] = q` for drifted BM
/// with resetting on `(0, 1)`.
pub fn ifpp_linear_closed_form(q: f64, mu: f64, r: f64, x_r: f64) -> Result<LinearSolution> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::domain(format!("q must lie in (0,1), got {q}")));
    }
    let c = BmResetCoefficients::new(mu, r, x_r, 1.0)?;
    let mut mass = 0.0;
    let mut tilt = 0.0;
    let mut scale = 0.0;
    for (ci, d) in [(c.c1, c.d1), (c.c2, c.d2)] {
        let e = d.exp();
        // ∫π₀ and ∫(x - ½)π₀ over (0,1)
        mass += ci * (d.exp_m1() / d - e);
        tilt += ci * (e * (d - 2.0) + 2.0 + d) / (2.0 * d * d);
        scale += (ci * e).abs() + ci.abs();
    }
    if !(tilt.abs() > 1e-14 * scale.max(1.0)) {
        return Err(Error::Degenerate(format!(
            "linear IFPP denominator vanishes ({tilt:e}) for mu = {mu}, r = {r}, x_R = {x_r}"
        )));
    }
    let a1 = (q - mass) / tilt;
    let a0 = 1.0 - a1 / 2.0;
    let valid = a0 >= 0.0 && a1 + a0 >= 0.0;
    Ok(LinearSolution {
        a1,
        a0,
        valid_density: valid,
        warning: (!valid).then_some("a1 x + a0 is negative somewhere on (0,1); not a density"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::q_case1;

    fn bm_problem(kind: InverseKind, case: Case, search: SearchSpace) -> InverseProblem {
        InverseProblem {
            problem: kind,
            case,
            model: DiffusionModel::brownian(0.0),
            r: 1.0,
            b: None,
            x: None,
            x_r: None,
            conjugated_scale: false,
            search,
        }
    }

    #[test]
    fn linear_closed_form_round_trip() {
        for &(mu, r, x_r) in &[(0.0, 1.0, 0.5), (0.7, 2.0, 0.3), (-1.2, 0.4, 0.8)] {
            let reset = ResetSpec::fixed(r, x_r);
            let qu = q_case1(&DensityFamily::uniform(0.0, 1.0).unwrap(), mu, &reset, 1.0).unwrap().value;
            let s = ifpp_linear_closed_form(qu, mu, r, x_r).unwrap();
            assert!(s.a1.abs() < 1e-10 && (s.a0 - 1.0).abs() < 1e-10);
            let g = DensityFamily::linear(0.8).unwrap();
            let q = q_case1(&g, mu, &reset, 1.0).unwrap().value;
            let s = ifpp_linear_closed_form(q, mu, r, x_r).unwrap();
            assert!((s.a1 - 0.8).abs() < 1e-9, "{s:?}");
            assert!(s.valid_density);
        }
        let s = ifpp_linear_closed_form(0.98, 0.0, 1.0, 0.5).unwrap();
        assert!(!s.valid_density && s.warning.is_some());
    }

    #[test]
    fn uniform_fixed_family_is_exact() {
        let mut p = bm_problem(
            InverseKind::Ifpp { q: 0.5 },
            Case::RandomInitial,
            SearchSpace::family(DensityFamily::uniform(0.0, 1.0).unwrap(), vec![]),
        );
        p.b = Some(1.0);
        p.x_r = Some(0.5);
        let s = solve_ifpp(&p).unwrap();
        assert_eq!(s.status, Status::Exact);
        assert!(s.residual < 1e-10);
    }

    #[test]
    fn exponential_passage_law_recovered() {
        let truth = DensityFamily::exponential(1.0).unwrap();
        let mut p = bm_problem(
            InverseKind::Ifpt {
                target: FptLawSpec::Passage {
                    law: PassageTransform::random_initial(truth, 0.0, 1.0, 1.0),
                },
            },
            Case::RandomInitial,
            SearchSpace::family(
                DensityFamily::exponential(3.0).unwrap(),
                vec![FreeParam::new("theta", 0.05, 20.0)],
            ),
        );
        p.x_r = Some(1.0);
        let s = solve_ifpt(&p).unwrap();
        assert_eq!(s.status, Status::Exact);
        assert!((s.parameters["theta"] - 1.0).abs() < 1e-6, "{s:?}");
        assert!(s.diagnostics.unique);
    }

    #[test]
    fn gamma_mean_recovered_and_range_reported() {
        let (a, th) = (2.0, 1.5);
        let s2 = 2f64.sqrt();
        let m = (s2 * 0.7).exp() * (1.0 - (th / (th + s2)).powf(a));
        let mut p = bm_problem(
            InverseKind::Imfpt { m },
            Case::RandomInitial,
            SearchSpace::family(DensityFamily::gamma(a, 4.0).unwrap(), vec![FreeParam::new("rate", 0.01, 100.0)]),
        );
        p.x_r = Some(0.7);
        let s = solve_imfpt(&p).unwrap();
        assert!((s.parameters["rate"] - th).abs() < 1e-8 * th, "{s:?}");
        p.problem = InverseKind::Imfpt { m: 1e-9 };
        assert!(matches!(solve(&p), Err(Error::Range { .. })));
    }

    #[test]
    fn json_round_trip() {
        let mut p = bm_problem(
            InverseKind::Imfet { m: 0.1 },
            Case::RandomReset,
            SearchSpace::family(
                DensityFamily::beta(2.0, 2.0).unwrap(),
                vec![FreeParam::new("alpha", 0.5, 5.0).tied_to("beta")],
            ),
        );
        p.b = Some(1.0);
        p.x = Some(0.5);
        let s = serde_json::to_string(&p).unwrap();
        let back: InverseProblem = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert_eq!(serde_json::to_string(&back).unwrap(), s);
        let bad = s.replace("\"r\":", "\"rate\":");
        assert!(serde_json::from_str::<InverseProblem>(&bad).is_err());
    }

    #[test]
    fn invalid_target_transform() {
        let mut p = bm_problem(
            InverseKind::Ifpt {
                target: FptLawSpec::Transform {
                    lambda: vec![0.0, 1.0],
                    values: vec![0.9, 0.5],
                },
            },
            Case::RandomInitial,
            SearchSpace::family(DensityFamily::exponential(1.0).unwrap(), vec![]),
        );
        p.x_r = Some(1.0);
        assert!(matches!(solve(&p), Err(Error::Domain(_))));
    }
}
