use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::densities::DensityFamily;
use crate::error::{Error, Result};

use super::conjugate::ConjugationMap;

/// A user-supplied coefficient function.
#[derive(Clone)]
pub struct CoefficientFn(pub Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl fmt::Debug for CoefficientFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CoefficientFn(..)")
    }
}

impl PartialEq for CoefficientFn {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

/// One coefficient (drift or diffusion) of a custom model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case", deny_unknown_fields)]
pub enum Coefficient {
    Constant {
        value: f64,
    },
    /// `slope * x + intercept`
    Affine {
        slope: f64,
        intercept: f64,
    },
    /// `a + b * e^{rate x}`
    ExpAffine {
        a: f64,
        b: f64,
        rate: f64,
    },
    /// Piecewise-linear interpolation of `(x, y)` samples; constant beyond the ends.
    Tabulated {
        x: Vec<f64>,
        y: Vec<f64>,
    },
    #[serde(skip)]
    Function(CoefficientFn),
}

impl Coefficient {
    pub fn function(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::Function(CoefficientFn(Arc::new(f)))
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Coefficient::Constant { value } => *value,
            Coefficient::Affine { slope, intercept } => slope * x + intercept,
            Coefficient::ExpAffine { a, b, rate } => a + b * (rate * x).exp(),
            Coefficient::Tabulated { x: xs, y } => {
                if x <= xs[0] {
                    return y[0];
                }
                let n = xs.len();
                if x >= xs[n - 1] {
                    return y[n - 1];
                }
                let i = xs.partition_point(|&p| p <= x) - 1;
                let t = (x - xs[i]) / (xs[i + 1] - xs[i]);
                y[i] + t * (y[i + 1] - y[i])
            }
            Coefficient::Function(f) => (f.0)(x),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Coefficient::Tabulated { x, y } = self {
            if x.len() < 2 || x.len() != y.len() {
                return Err(Error::domain("tabulated coefficient needs matching x, y with >= 2 points"));
            }
            if x.windows(2).any(|w| !(w[0] < w[1])) || y.iter().any(|v| !v.is_finite()) {
                return Err(Error::domain("tabulated coefficient grid must be strictly increasing and finite"));
            }
        }
        Ok(())
    }
}

/// The underlying diffusion `dX = μ(X) dt + σ(X) dW`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DiffusionModel {
    /// `μ` constant, `σ = 1`.
    BrownianDrift { mu: f64 },
    /// `μ(x) = -ν x`, `σ` constant.
    OrnsteinUhlenbeck { nu: f64, sigma: f64 },
    /// `μ(x) = θ x`, `σ(x) = σ x`.
    GeometricBm { theta: f64, sigma: f64 },
    /// `μ = 1/4`, `σ(x) = √x`; conjugated to BM by `v(x) = 2√x`.
    Feller,
    /// `μ(x) = 1/4 - x/2`, `σ(x) = √(x(1-x))`; conjugated by `v(x) = 2 asin √x`.
    WrightFisher,
    Custom {
        drift: Coefficient,
        diffusion: Coefficient,
    },
}

impl DiffusionModel {
    pub fn brownian(mu: f64) -> Self {
        DiffusionModel::BrownianDrift { mu }
    }

    pub fn custom(drift: Coefficient, diffusion: Coefficient) -> Result<Self> {
        let m = DiffusionModel::Custom { drift, diffusion };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DiffusionModel::BrownianDrift { mu } if !mu.is_finite() => {
                Err(Error::domain("drift must be finite"))
            }
            DiffusionModel::OrnsteinUhlenbeck { nu, sigma } if !(*nu > 0.0 && *sigma > 0.0) => {
                Err(Error::domain("OU parameters must be > 0"))
            }
            DiffusionModel::GeometricBm { theta, sigma } if !(theta.is_finite() && *sigma > 0.0) => {
                Err(Error::domain("GBM needs finite theta and sigma > 0"))
            }
            DiffusionModel::Custom { drift, diffusion } => {
                drift.validate()?;
                diffusion.validate()
            }
            _ => Ok(()),
        }
    }

    pub fn drift(&self, x: f64) -> f64 {
        match self {
            DiffusionModel::BrownianDrift { mu } => *mu,
            DiffusionModel::OrnsteinUhlenbeck { nu, .. } => -nu * x,
            DiffusionModel::GeometricBm { theta, .. } => theta * x,
            DiffusionModel::Feller => 0.25,
            DiffusionModel::WrightFisher => 0.25 - 0.5 * x,
            DiffusionModel::Custom { drift, .. } => drift.eval(x),
        }
    }

    pub fn diffusion(&self, x: f64) -> f64 {
        match self {
            DiffusionModel::BrownianDrift { .. } => 1.0,
            DiffusionModel::OrnsteinUhlenbeck { sigma, .. } => *sigma,
            DiffusionModel::GeometricBm { sigma, .. } => sigma * x,
            DiffusionModel::Feller => x.max(0.0).sqrt(),
            DiffusionModel::WrightFisher => (x * (1.0 - x)).max(0.0).sqrt(),
            DiffusionModel::Custom { diffusion, .. } => diffusion.eval(x),
        }
    }

    /// Drift when the model is Brownian motion with constant drift.
    pub fn bm_drift(&self) -> Option<f64> {
        match self {
            DiffusionModel::BrownianDrift { mu } => Some(*mu),
            _ => None,
        }
    }

    /// Map turning the model into standard BM, when one is known.
    pub fn conjugation(&self) -> Option<ConjugationMap> {
        match self {
            DiffusionModel::BrownianDrift { mu } if *mu == 0.0 => Some(ConjugationMap::Identity),
            DiffusionModel::Feller => Some(ConjugationMap::Feller),
            DiffusionModel::WrightFisher => Some(ConjugationMap::WrightFisher),
            _ => None,
        }
    }
}

/// Where the process lands at a reset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResetPosition {
    Fixed(f64),
    Random(DensityFamily),
}

/// Poissonian resetting at `rate` to `position`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResetSpec {
    pub rate: f64,
    pub position: ResetPosition,
}

impl ResetSpec {
    pub fn fixed(rate: f64, x_r: f64) -> Self {
        ResetSpec {
            rate,
            position: ResetPosition::Fixed(x_r),
        }
    }

    pub fn random(rate: f64, h: DensityFamily) -> Self {
        ResetSpec {
            rate,
            position: ResetPosition::Random(h),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate >= 0.0 && self.rate.is_finite()) {
            return Err(Error::domain(format!("reset rate must be finite and >= 0, got {}", self.rate)));
        }
        if let ResetPosition::Fixed(x) = self.position {
            if !x.is_finite() {
                return Err(Error::domain("reset position must be finite"));
            }
        }
        Ok(())
    }

    /// The fixed reset position, or a domain error for random positions.
    pub fn fixed_position(&self) -> Result<f64> {
        match self.position {
            ResetPosition::Fixed(x) => Ok(x),
            ResetPosition::Random(_) => Err(Error::domain("operation needs a fixed reset position")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        let i = Interval { lo, hi };
        i.validate()?;
        Ok(i)
    }

    /// `(0, b)`.
    pub fn unit(b: f64) -> Result<Self> {
        Self::new(0.0, b)
    }

    pub fn validate(&self) -> Result<()> {
        if self.lo.is_finite() && self.hi.is_finite() && self.lo < self.hi {
            Ok(())
        } else {
            Err(Error::domain(format!("interval needs lo < hi, got ({}, {})", self.lo, self.hi)))
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn contains_open(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_interpolates() {
        let c = Coefficient::Tabulated {
            x: vec![0.0, 1.0, 2.0],
            y: vec![0.0, 2.0, 0.0],
        };
        assert_eq!(c.eval(0.5), 1.0);
        assert_eq!(c.eval(1.5), 1.0);
        assert_eq!(c.eval(-1.0), 0.0);
        assert_eq!(c.eval(5.0), 0.0);
    }

    #[test]
    fn model_json_round_trip() {
        let m = DiffusionModel::custom(
            Coefficient::ExpAffine {
                a: 1.0,
                b: -2.0,
                rate: -std::f64::consts::LN_2,
            },
            Coefficient::Constant { value: 1.0 },
        )
        .unwrap();
        let s = serde_json::to_string(&m).unwrap();
        let back: DiffusionModel = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        let r = ResetSpec::fixed(1.0, 0.5);
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"rate":1.0,"position":{"fixed":0.5}}"#);
    }

    #[test]
    fn function_coefficient_cannot_serialize() {
        let m = DiffusionModel::Custom {
            drift: Coefficient::function(|x| x),
            diffusion: Coefficient::Constant { value: 1.0 },
        };
        assert!(serde_json::to_string(&m).is_err());
        assert_eq!(m.drift(0.3), 0.3);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(Interval::new(1.0, 0.0).is_err());
        assert!(ResetSpec::fixed(-1.0, 0.5).validate().is_err());
        assert!(DiffusionModel::custom(
            Coefficient::Tabulated { x: vec![0.0, 0.0], y: vec![1.0, 1.0] },
            Coefficient::Constant { value: 1.0 }
        )
        .is_err());
    }
}
