//! Parametric probability laws used as candidate initial-position and
//! reset-position densities.
//!
//! [`DensityFamily`] is a validated newtype over [`FamilyKind`]. Every family
//! exposes its pdf/pmf, a closed-form Laplace transform `E[e^{-sX}]` (real and
//! complex argument), moments, a sampler, and a quadrature-based expectation
//! operator used as the independent route for mixture integrals.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::Distribution;
use serde::{Deserialize, Serialize};
use statrs::function::beta::ln_beta;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};
use crate::quadrature::{integrate_with_breaks, QuadConfig, QuadResult, QuadValue};
use crate::special::{beta_mgf, exprel, exprel_c, int_x_exp_c};

/// Tail mass discarded when a half-line law is truncated for quadrature.
pub const CONTINUOUS_TAIL: f64 = 1e-12;
/// Tail mass discarded when an infinite discrete support is enumerated.
pub const DISCRETE_TAIL: f64 = 1e-14;

fn unit_support() -> [f64; 2] {
    [0.0, 1.0]
}

/// Raw (unvalidated) description of a family; the JSON form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyKind {
    /// Beta(α, β) rescaled to `support` (default `(0,1)`).
    Beta {
        alpha: f64,
        beta: f64,
        #[serde(default = "unit_support")]
        support: [f64; 2],
    },
    Uniform {
        support: [f64; 2],
    },
    /// `θ e^{-θ(x-lo)} / (1 - e^{-θ(hi-lo)})` on `support`.
    TruncatedExponential {
        theta: f64,
        support: [f64; 2],
    },
    Exponential {
        theta: f64,
    },
    /// Gamma with shape `a` and rate `θ`.
    Gamma {
        shape: f64,
        rate: f64,
    },
    /// Symmetric triangle on (0,1): `4x` on (0,½), `4 - 4x` on [½,1).
    Triangular,
    /// `a1 x + a0` on (0,1) with `a1/2 + a0 = 1`.
    Linear {
        a1: f64,
        a0: f64,
    },
    DiscreteUniform {
        points: Vec<f64>,
    },
    Binomial {
        n: u32,
        p: f64,
    },
    /// `P(k) = p (1-p)^k`, `k = 0, 1, ...`
    Geometric {
        p: f64,
    },
    Poisson {
        nu: f64,
    },
    PointMass {
        x: f64,
    },
}

/// A validated density family. Immutable; cheap to clone.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyKind", into = "FamilyKind")]
pub struct DensityFamily(FamilyKind);

impl From<DensityFamily> for FamilyKind {
    fn from(f: DensityFamily) -> Self {
        f.0
    }
}

impl TryFrom<FamilyKind> for DensityFamily {
    type Error = Error;

    fn try_from(kind: FamilyKind) -> Result<Self> {
        validate(&kind)?;
        Ok(DensityFamily(kind))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn probability(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must lie in (0,1), got {v}")))
    }
}

fn ordered(support: &[f64; 2]) -> Result<()> {
    if support[0].is_finite() && support[1].is_finite() && support[0] < support[1] {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "support endpoints must be finite and ordered, got [{}, {}]",
            support[0], support[1]
        )))
    }
}

fn validate(kind: &FamilyKind) -> Result<()> {
    match kind {
        FamilyKind::Beta {
            alpha,
            beta,
            support,
        } => {
            positive("alpha", *alpha)?;
            positive("beta", *beta)?;
            ordered(support)
        }
        FamilyKind::Uniform { support } => ordered(support),
        FamilyKind::TruncatedExponential { theta, support } => {
            positive("theta", *theta)?;
            ordered(support)
        }
        FamilyKind::Exponential { theta } => positive("theta", *theta),
        FamilyKind::Gamma { shape, rate } => {
            positive("shape", *shape)?;
            positive("rate", *rate)
        }
        FamilyKind::Triangular => Ok(()),
        FamilyKind::Linear { a1, a0 } => {
            if !(a1.is_finite() && a0.is_finite()) {
                return Err(Error::domain("linear coefficients must be finite"));
            }
            if (a1 / 2.0 + a0 - 1.0).abs() > 1e-12 {
                return Err(Error::domain(format!(
                    "linear density must integrate to one: a1/2 + a0 = {}",
                    a1 / 2.0 + a0
                )));
            }
            if *a0 < 0.0 || a1 + a0 < 0.0 {
                return Err(Error::domain(format!(
                    "linear density {a1} x + {a0} is negative somewhere on (0,1)"
                )));
            }
            Ok(())
        }
        FamilyKind::DiscreteUniform { points } => {
            if points.is_empty() || points.iter().any(|p| !p.is_finite()) {
                Err(Error::domain("discrete uniform needs finite points"))
            } else {
                Ok(())
            }
        }
        FamilyKind::Binomial { n, p } => {
            if *n < 1 {
                return Err(Error::domain("binomial n must be >= 1"));
            }
            probability("p", *p)
        }
        FamilyKind::Geometric { p } => probability("p", *p),
        FamilyKind::Poisson { nu } => positive("nu", *nu),
        FamilyKind::PointMass { x } => {
            if x.is_finite() {
                Ok(())
            } else {
                Err(Error::domain("point mass location must be finite"))
            }
        }
    }
}

impl DensityFamily {
    pub fn new(kind: FamilyKind) -> Result<Self> {
        Self::try_from(kind)
    }

    pub fn kind(&self) -> &FamilyKind {
        &self.0
    }

    pub fn beta(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(FamilyKind::Beta {
            alpha,
            beta,
            support: [0.0, 1.0],
        })
    }

    /// Beta law stretched onto `(0, b)`.
    pub fn scaled_beta(alpha: f64, beta: f64, b: f64) -> Result<Self> {
        Self::new(FamilyKind::Beta {
            alpha,
            beta,
            support: [0.0, b],
        })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        Self::new(FamilyKind::Uniform { support: [lo, hi] })
    }

    pub fn truncated_exponential(theta: f64, upper: f64) -> Result<Self> {
        Self::new(FamilyKind::TruncatedExponential {
            theta,
            support: [0.0, upper],
        })
    }

    pub fn exponential(theta: f64) -> Result<Self> {
        Self::new(FamilyKind::Exponential { theta })
    }

    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        Self::new(FamilyKind::Gamma { shape, rate })
    }

    pub fn triangular() -> Self {
        DensityFamily(FamilyKind::Triangular)
    }

    /// Linear density `a1 x + (1 - a1/2)` on (0,1).
    pub fn linear(a1: f64) -> Result<Self> {
        Self::new(FamilyKind::Linear {
            a1,
            a0: 1.0 - a1 / 2.0,
        })
    }

    pub fn discrete_uniform(points: Vec<f64>) -> Result<Self> {
        Self::new(FamilyKind::DiscreteUniform { points })
    }

    pub fn binomial(n: u32, p: f64) -> Result<Self> {
        Self::new(FamilyKind::Binomial { n, p })
    }

    pub fn geometric(p: f64) -> Result<Self> {
        Self::new(FamilyKind::Geometric { p })
    }

    pub fn poisson(nu: f64) -> Result<Self> {
        Self::new(FamilyKind::Poisson { nu })
    }

    pub fn point_mass(x: f64) -> Result<Self> {
        Self::new(FamilyKind::PointMass { x })
    }

    pub fn name(&self) -> &'static str {
        match self.0 {
            FamilyKind::Beta { .. } => "beta",
            FamilyKind::Uniform { .. } => "uniform",
            FamilyKind::TruncatedExponential { .. } => "truncated_exponential",
            FamilyKind::Exponential { .. } => "exponential",
            FamilyKind::Gamma { .. } => "gamma",
            FamilyKind::Triangular => "triangular",
            FamilyKind::Linear { .. } => "linear",
            FamilyKind::DiscreteUniform { .. } => "discrete_uniform",
            FamilyKind::Binomial { .. } => "binomial",
            FamilyKind::Geometric { .. } => "geometric",
            FamilyKind::Poisson { .. } => "poisson",
            FamilyKind::PointMass { .. } => "point_mass",
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(
            self.0,
            FamilyKind::DiscreteUniform { .. }
                | FamilyKind::Binomial { .. }
                | FamilyKind::Geometric { .. }
                | FamilyKind::Poisson { .. }
                | FamilyKind::PointMass { .. }
        )
    }

    /// Closed hull of the support; the upper end is `+∞` for half-line laws.
    pub fn support(&self) -> (f64, f64) {
        match &self.0 {
            FamilyKind::Beta { support, .. }
            | FamilyKind::Uniform { support }
            | FamilyKind::TruncatedExponential { support, .. } => (support[0], support[1]),
            FamilyKind::Exponential { .. } | FamilyKind::Gamma { .. } => (0.0, f64::INFINITY),
            FamilyKind::Triangular | FamilyKind::Linear { .. } => (0.0, 1.0),
            FamilyKind::DiscreteUniform { points } => (
                points.iter().cloned().fold(f64::INFINITY, f64::min),
                points.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            ),
            FamilyKind::Binomial { n, .. } => (0.0, *n as f64),
            FamilyKind::Geometric { .. } | FamilyKind::Poisson { .. } => (0.0, f64::INFINITY),
            FamilyKind::PointMass { x } => (*x, *x),
        }
    }

    /// Density (continuous) or mass (discrete) at `x`; zero off the support.
    pub fn pdf(&self, x: f64) -> f64 {
        match &self.0 {
            FamilyKind::Beta {
                alpha,
                beta,
                support,
            } => {
                let w = support[1] - support[0];
                let t = (x - support[0]) / w;
                if !(0.0..=1.0).contains(&t) {
                    return 0.0;
                }
                t.powf(alpha - 1.0) * (1.0 - t).powf(beta - 1.0) * (-ln_beta(*alpha, *beta)).exp() / w
            }
            FamilyKind::Uniform { support } => {
                if x >= support[0] && x <= support[1] {
                    1.0 / (support[1] - support[0])
                } else {
                    0.0
                }
            }
            FamilyKind::TruncatedExponential { theta, support } => {
                if x < support[0] || x > support[1] {
                    return 0.0;
                }
                let w = support[1] - support[0];
                theta * (-theta * (x - support[0])).exp() / (-(-theta * w).exp_m1())
            }
            FamilyKind::Exponential { theta } => {
                if x < 0.0 {
                    0.0
                } else {
                    theta * (-theta * x).exp()
                }
            }
            FamilyKind::Gamma { shape, rate } => {
                if x < 0.0 {
                    0.0
                } else if x == 0.0 {
                    match shape.partial_cmp(&1.0) {
                        Some(std::cmp::Ordering::Less) => f64::INFINITY,
                        Some(std::cmp::Ordering::Equal) => *rate,
                        _ => 0.0,
                    }
                } else {
                    (shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(*shape)).exp()
                }
            }
            FamilyKind::Triangular => {
                if !(0.0..=1.0).contains(&x) {
                    0.0
                } else if x < 0.5 {
                    4.0 * x
                } else {
                    4.0 - 4.0 * x
                }
            }
            FamilyKind::Linear { a1, a0 } => {
                if (0.0..=1.0).contains(&x) {
                    a1 * x + a0
                } else {
                    0.0
                }
            }
            FamilyKind::DiscreteUniform { points } => {
                let hits = points.iter().filter(|&&p| p == x).count();
                hits as f64 / points.len() as f64
            }
            FamilyKind::Binomial { n, p } => {
                if x < 0.0 || x > *n as f64 || x.fract() != 0.0 {
                    return 0.0;
                }
                let nf = *n as f64;
                (ln_gamma(nf + 1.0) - ln_gamma(x + 1.0) - ln_gamma(nf - x + 1.0)
                    + x * p.ln()
                    + (nf - x) * (-p).ln_1p())
                .exp()
            }
            FamilyKind::Geometric { p } => {
                if x < 0.0 || x.fract() != 0.0 {
                    0.0
                } else {
                    p * (x * (-p).ln_1p()).exp()
                }
            }
            FamilyKind::Poisson { nu } => {
                if x < 0.0 || x.fract() != 0.0 {
                    0.0
                } else {
                    (x * nu.ln() - nu - ln_gamma(x + 1.0)).exp()
                }
            }
            FamilyKind::PointMass { x: x0 } => {
                if x == *x0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Lower end of the convergence strip of `E[e^{-sX}]` (`-∞` for bounded laws).
    pub fn laplace_abscissa(&self) -> f64 {
        match &self.0 {
            FamilyKind::Exponential { theta } => -theta,
            FamilyKind::Gamma { rate, .. } => -rate,
            FamilyKind::Geometric { p } => (-p).ln_1p(),
            _ => f64::NEG_INFINITY,
        }
    }

    /// `E[e^{-sX}]` for real `s` inside the convergence strip.
    pub fn laplace(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return Ok(1.0);
        }
        match &self.0 {
            // real fast paths
            FamilyKind::Exponential { theta } => {
                self.check_strip(s)?;
                Ok(theta / (theta + s))
            }
            FamilyKind::Gamma { shape, rate } => {
                self.check_strip(s)?;
                Ok((rate / (rate + s)).powf(*shape))
            }
            FamilyKind::Uniform { support } => {
                let w = support[1] - support[0];
                Ok((-s * support[0]).exp() * exprel(-s * w))
            }
            FamilyKind::PointMass { x } => Ok((-s * x).exp()),
            _ => self.laplace_complex(Complex64::new(s, 0.0)).map(|z| z.re),
        }
    }

    fn check_strip(&self, re_s: f64) -> Result<()> {
        let a = self.laplace_abscissa();
        if re_s > a {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "Laplace argument {re_s} outside the convergence strip (> {a}) of the {} law",
                self.name()
            )))
        }
    }

    /// `E[e^{-sX}]` for complex `s` with `Re s` inside the convergence strip.
    pub fn laplace_complex(&self, s: Complex64) -> Result<Complex64> {
        self.check_strip(s.re)?;
        let one = Complex64::new(1.0, 0.0);
        let v = match &self.0 {
            FamilyKind::Beta {
                alpha,
                beta,
                support,
            } => {
                let w = support[1] - support[0];
                match beta_mgf(*alpha, *beta, -s * w) {
                    Some(m) => (-s * support[0]).exp() * m,
                    None => self.expect(|x| (-s * x).exp(), &QuadConfig::default())?.value,
                }
            }
            FamilyKind::Uniform { support } => {
                let w = support[1] - support[0];
                (-s * support[0]).exp() * exprel_c(-s * w)
            }
            FamilyKind::TruncatedExponential { theta, support } => {
                let w = support[1] - support[0];
                // θ ∫_0^w e^{-(θ+s)u} du / (1 - e^{-θw})
                let k = Complex64::new(*theta, 0.0) + s;
                let num = exprel_c(-k * w) * w * *theta;
                let den = -(-theta * w).exp_m1();
                (-s * support[0]).exp() * num / den
            }
            FamilyKind::Exponential { theta } => *theta / (s + theta),
            FamilyKind::Gamma { shape, rate } => {
                ((Complex64::new(*rate, 0.0) / (s + rate)).ln() * *shape).exp()
            }
            FamilyKind::Triangular => {
                // E[e^{tη}] = z(t) = 4 (e^{t/2} - 1)^2 / t^2 at t = -s
                let e = exprel_c(-s / 2.0);
                e * e
            }
            FamilyKind::Linear { a1, a0 } => int_x_exp_c(-s) * *a1 + exprel_c(-s) * *a0,
            FamilyKind::DiscreteUniform { points } => {
                points.iter().map(|&p| (-s * p).exp()).sum::<Complex64>() / points.len() as f64
            }
            FamilyKind::Binomial { n, p } => (one * (1.0 - p) + (-s).exp() * *p).powu(*n),
            FamilyKind::Geometric { p } => *p / (one - (-s).exp() * (1.0 - p)),
            FamilyKind::Poisson { nu } => (((-s).exp() - 1.0) * *nu).exp(),
            FamilyKind::PointMass { x } => (-s * *x).exp(),
        };
        Ok(v)
    }

    pub fn mean(&self) -> f64 {
        match &self.0 {
            FamilyKind::Beta {
                alpha,
                beta,
                support,
            } => support[0] + (support[1] - support[0]) * alpha / (alpha + beta),
            FamilyKind::Uniform { support } => 0.5 * (support[0] + support[1]),
            FamilyKind::TruncatedExponential { theta, support } => {
                let w = support[1] - support[0];
                support[0] + 1.0 / theta - w / (theta * w).exp_m1()
            }
            FamilyKind::Exponential { theta } => 1.0 / theta,
            FamilyKind::Gamma { shape, rate } => shape / rate,
            FamilyKind::Triangular => 0.5,
            FamilyKind::Linear { a1, a0 } => a1 / 3.0 + a0 / 2.0,
            FamilyKind::DiscreteUniform { points } => {
                points.iter().sum::<f64>() / points.len() as f64
            }
            FamilyKind::Binomial { n, p } => *n as f64 * p,
            FamilyKind::Geometric { p } => (1.0 - p) / p,
            FamilyKind::Poisson { nu } => *nu,
            FamilyKind::PointMass { x } => *x,
        }
    }

    pub fn variance(&self) -> f64 {
        match &self.0 {
            FamilyKind::Beta {
                alpha,
                beta,
                support,
            } => {
                let w = support[1] - support[0];
                let s = alpha + beta;
                w * w * alpha * beta / (s * s * (s + 1.0))
            }
            FamilyKind::Uniform { support } => (support[1] - support[0]).powi(2) / 12.0,
            FamilyKind::TruncatedExponential { theta, support } => {
                let w = support[1] - support[0];
                let e = (theta * w).exp_m1();
                1.0 / (theta * theta) - w * w * (e + 1.0) / (e * e)
            }
            FamilyKind::Exponential { theta } => 1.0 / (theta * theta),
            FamilyKind::Gamma { shape, rate } => shape / (rate * rate),
            FamilyKind::Triangular => 1.0 / 24.0,
            FamilyKind::Linear { a1, a0 } => {
                let m = a1 / 3.0 + a0 / 2.0;
                a1 / 4.0 + a0 / 3.0 - m * m
            }
            FamilyKind::DiscreteUniform { points } => {
                let m = self.mean();
                points.iter().map(|p| (p - m) * (p - m)).sum::<f64>() / points.len() as f64
            }
            FamilyKind::Binomial { n, p } => *n as f64 * p * (1.0 - p),
            FamilyKind::Geometric { p } => (1.0 - p) / (p * p),
            FamilyKind::Poisson { nu } => *nu,
            FamilyKind::PointMass { .. } => 0.0,
        }
    }

    /// Atoms `(x, mass)` of a discrete law. Infinite supports are enumerated until
    /// the remaining tail mass is below [`DISCRETE_TAIL`]. `None` for continuous laws.
    pub fn atoms(&self) -> Option<Vec<(f64, f64)>> {
        match &self.0 {
            FamilyKind::DiscreteUniform { points } => {
                let w = 1.0 / points.len() as f64;
                Some(points.iter().map(|&p| (p, w)).collect())
            }
            FamilyKind::Binomial { n, .. } => {
                Some((0..=*n).map(|k| (k as f64, self.pdf(k as f64))).collect())
            }
            FamilyKind::Geometric { p } => {
                // tail beyond k: (1-p)^{k+1}
                let q = 1.0 - p;
                let k_max = (DISCRETE_TAIL.ln() / q.ln()).ceil() as u64;
                Some((0..=k_max).map(|k| (k as f64, p * q.powi(k as i32))).collect())
            }
            FamilyKind::Poisson { nu } => {
                let mut out = Vec::new();
                let mut cum = 0.0;
                let mut k = 0u64;
                loop {
                    let m = self.pdf(k as f64);
                    cum += m;
                    out.push((k as f64, m));
                    if (k as f64) > *nu && 1.0 - cum < DISCRETE_TAIL {
                        break;
                    }
                    k += 1;
                }
                Some(out)
            }
            FamilyKind::PointMass { x } => Some(vec![(*x, 1.0)]),
            _ => None,
        }
    }

    /// Point beyond which at most `tail` probability remains.
    pub fn upper_quantile(&self, tail: f64) -> f64 {
        match &self.0 {
            FamilyKind::Exponential { theta } => -tail.ln() / theta,
            FamilyKind::Gamma { shape, rate } => {
                // bracket then bisect on the regularized upper incomplete gamma
                let mut hi = (shape + 10.0 * shape.sqrt() + 10.0).max(1.0);
                while gamma_ur(*shape, hi) > tail {
                    hi *= 2.0;
                }
                let mut lo = 0.0;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if gamma_ur(*shape, mid) > tail {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                hi / rate
            }
            _ => match self.atoms() {
                Some(a) => a.last().map(|p| p.0).unwrap_or(0.0),
                None => self.support().1,
            },
        }
    }

    /// `E[f(X)]` by exact summation (discrete) or adaptive quadrature (continuous).
    ///
    /// Beta and Gamma laws are integrated after a power substitution that removes
    /// the endpoint singularity of the density. Half-line laws are truncated at
    /// the `1 - 1e-12` quantile and the tail bound is added to the error.
    pub fn expect<T, F>(&self, f: F, cfg: &QuadConfig) -> Result<QuadResult<T>>
    where
        T: QuadValue,
        F: Fn(f64) -> T,
    {
        if let Some(atoms) = self.atoms() {
            let mut sum = T::zero();
            let mut sup: f64 = 0.0;
            let mut mass = 0.0;
            for &(x, w) in &atoms {
                let v = f(x);
                sup = sup.max(v.magnitude());
                sum = sum + v * w;
                mass += w;
            }
            return Ok(QuadResult {
                value: sum,
                error: (1.0 - mass).abs() * sup.max(1.0),
                evaluations: atoms.len(),
            });
        }
        match &self.0 {
            FamilyKind::Beta {
                alpha,
                beta,
                support,
            } => {
                let (a, b) = (*alpha, *beta);
                let (lo, w) = (support[0], support[1] - support[0]);
                let inv_b = (-ln_beta(a, b)).exp();
                // t = u^{1/α} on [0, ½]; 1 - t = v^{1/β} on [½, 1]
                let left = integrate_with_breaks(
                    |u: f64| {
                        let t = u.powf(1.0 / a);
                        f(lo + w * t) * ((1.0 - t).powf(b - 1.0) * inv_b / a)
                    },
                    &[0.0, 0.5f64.powf(a)],
                    cfg,
                )?;
                let right = integrate_with_breaks(
                    |v: f64| {
                        let s = v.powf(1.0 / b);
                        f(lo + w * (1.0 - s)) * ((1.0 - s).powf(a - 1.0) * inv_b / b)
                    },
                    &[0.0, 0.5f64.powf(b)],
                    cfg,
                )?;
                Ok(QuadResult {
                    value: left.value + right.value,
                    error: left.error + right.error,
                    evaluations: left.evaluations + right.evaluations,
                })
            }
            FamilyKind::Gamma { shape, rate } => {
                let (a, th) = (*shape, *rate);
                let split = 1.0 / th;
                let top = self.upper_quantile(CONTINUOUS_TAIL);
                let norm = (a * th.ln() - ln_gamma(a) - a.ln()).exp();
                // x = u^{1/a} on [0, split]
                let head = integrate_with_breaks(
                    |u: f64| {
                        let x = u.powf(1.0 / a);
                        f(x) * ((-th * x).exp() * norm)
                    },
                    &[0.0, split.powf(a)],
                    cfg,
                )?;
                let body = integrate_with_breaks(|x: f64| f(x) * self.pdf(x), &[split, top.max(split)], cfg)?;
                let tail_bound = CONTINUOUS_TAIL * f(top).magnitude().max(1.0);
                Ok(QuadResult {
                    value: head.value + body.value,
                    error: head.error + body.error + tail_bound,
                    evaluations: head.evaluations + body.evaluations,
                })
            }
            FamilyKind::Exponential { .. } => {
                let top = self.upper_quantile(CONTINUOUS_TAIL);
                let mut r = integrate_with_breaks(|x: f64| f(x) * self.pdf(x), &[0.0, top], cfg)?;
                r.error += CONTINUOUS_TAIL * f(top).magnitude().max(1.0);
                Ok(r)
            }
            FamilyKind::Triangular => {
                integrate_with_breaks(|x: f64| f(x) * self.pdf(x), &[0.0, 0.5, 1.0], cfg)
            }
            _ => {
                let (lo, hi) = self.support();
                integrate_with_breaks(|x: f64| f(x) * self.pdf(x), &[lo, hi], cfg)
            }
        }
    }

    /// Draw one variate.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.0 {
            FamilyKind::Beta {
                alpha,
                beta,
                support,
            } => {
                let d = rand_distr::Beta::new(*alpha, *beta).expect("validated beta parameters");
                support[0] + (support[1] - support[0]) * d.sample(rng)
            }
            FamilyKind::Uniform { support } => {
                support[0] + (support[1] - support[0]) * rng.random::<f64>()
            }
            FamilyKind::TruncatedExponential { theta, support } => {
                let w = support[1] - support[0];
                let u: f64 = rng.random();
                // inverse cdf: F(x) = (1 - e^{-θx}) / (1 - e^{-θw})
                support[0] - (u * (-theta * w).exp_m1()).ln_1p() / theta
            }
            FamilyKind::Exponential { theta } => {
                rand_distr::Exp::new(*theta).expect("validated rate").sample(rng)
            }
            FamilyKind::Gamma { shape, rate } => rand_distr::Gamma::new(*shape, 1.0 / rate)
                .expect("validated gamma parameters")
                .sample(rng),
            FamilyKind::Triangular => 0.5 * (rng.random::<f64>() + rng.random::<f64>()),
            FamilyKind::Linear { a1, a0 } => {
                // solve a1 x^2 / 2 + a0 x = u
                let u: f64 = rng.random();
                2.0 * u / (a0 + (a0 * a0 + 2.0 * a1 * u).sqrt())
            }
            FamilyKind::DiscreteUniform { points } => points[rng.random_range(0..points.len())],
            FamilyKind::Binomial { n, p } => rand_distr::Binomial::new(u64::from(*n), *p)
                .expect("validated binomial parameters")
                .sample(rng) as f64,
            FamilyKind::Geometric { p } => rand_distr::Geometric::new(*p)
                .expect("validated geometric parameter")
                .sample(rng) as f64,
            FamilyKind::Poisson { nu } => rand_distr::Poisson::new(*nu)
                .expect("validated poisson rate")
                .sample(rng),
            FamilyKind::PointMass { x } => *x,
        }
    }

    /// Named real parameters, in a stable order.
    pub fn params(&self) -> Vec<(String, f64)> {
        let named = |v: &[(&str, f64)]| v.iter().map(|(k, x)| (k.to_string(), *x)).collect();
        match &self.0 {
            FamilyKind::Beta {
                alpha,
                beta,
                support,
            } => named(&[
                ("alpha", *alpha),
                ("beta", *beta),
                ("lo", support[0]),
                ("hi", support[1]),
            ]),
            FamilyKind::Uniform { support } => named(&[("lo", support[0]), ("hi", support[1])]),
            FamilyKind::TruncatedExponential { theta, support } => {
                named(&[("theta", *theta), ("lo", support[0]), ("hi", support[1])])
            }
            FamilyKind::Exponential { theta } => named(&[("theta", *theta)]),
            FamilyKind::Gamma { shape, rate } => named(&[("shape", *shape), ("rate", *rate)]),
            FamilyKind::Triangular => Vec::new(),
            FamilyKind::Linear { a1, a0 } => named(&[("a1", *a1), ("a0", *a0)]),
            FamilyKind::DiscreteUniform { points } => points
                .iter()
                .enumerate()
                .map(|(i, p)| (format!("points.{i}"), *p))
                .collect(),
            FamilyKind::Binomial { n, p } => named(&[("n", *n as f64), ("p", *p)]),
            FamilyKind::Geometric { p } => named(&[("p", *p)]),
            FamilyKind::Poisson { nu } => named(&[("nu", *nu)]),
            FamilyKind::PointMass { x } => named(&[("x", *x)]),
        }
    }

    /// Copy with one parameter replaced. Setting `a1` of a linear law also
    /// resets `a0 = 1 - a1/2` so the result stays normalized.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        let mut k = self.0.clone();
        let unknown = || Error::domain(format!("{} has no free parameter `{name}`", self.name()));
        match (&mut k, name) {
            (FamilyKind::Beta { alpha, .. }, "alpha") => *alpha = value,
            (FamilyKind::Beta { beta, .. }, "beta") => *beta = value,
            (FamilyKind::Beta { support, .. }, "lo")
            | (FamilyKind::Uniform { support }, "lo")
            | (FamilyKind::TruncatedExponential { support, .. }, "lo") => support[0] = value,
            (FamilyKind::Beta { support, .. }, "hi")
            | (FamilyKind::Uniform { support }, "hi")
            | (FamilyKind::TruncatedExponential { support, .. }, "hi") => support[1] = value,
            (FamilyKind::TruncatedExponential { theta, .. }, "theta")
            | (FamilyKind::Exponential { theta }, "theta") => *theta = value,
            (FamilyKind::Gamma { shape, .. }, "shape") => *shape = value,
            (FamilyKind::Gamma { rate, .. }, "rate") => *rate = value,
            (FamilyKind::Linear { a1, a0 }, "a1") => {
                *a1 = value;
                *a0 = 1.0 - value / 2.0;
            }
            (FamilyKind::Linear { a1, a0 }, "a0") => {
                *a0 = value;
                *a1 = 2.0 * (1.0 - value);
            }
            (FamilyKind::DiscreteUniform { points }, n) if n.starts_with("points.") => {
                let i: usize = n["points.".len()..].parse().map_err(|_| unknown())?;
                *points.get_mut(i).ok_or_else(unknown)? = value;
            }
            (FamilyKind::Binomial { p, .. }, "p") | (FamilyKind::Geometric { p }, "p") => *p = value,
            (FamilyKind::Poisson { nu }, "nu") => *nu = value,
            (FamilyKind::PointMass { x }, "x") => *x = value,
            _ => return Err(unknown()),
        }
        Self::new(k)
    }
}
