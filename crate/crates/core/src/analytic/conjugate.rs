//! Diffusions conjugated to Brownian motion, `X(t) = v⁻¹(W_t + v(x))`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::densities::DensityFamily;
use crate::error::{Error, Result};
use crate::quadrature::{QuadConfig, QuadResult, QuadValue};

use super::bm::pi0_bm;
use super::model::ResetSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjugationMap {
    Identity,
    /// `v(x) = 2√x` on `[0, ∞)`.
    Feller,
    /// `v(x) = 2 asin √x` on `[0, 1]`.
    WrightFisher,
}

impl ConjugationMap {
    pub fn v(&self, x: f64) -> f64 {
        match self {
            ConjugationMap::Identity => x,
            ConjugationMap::Feller => 2.0 * x.sqrt(),
            ConjugationMap::WrightFisher => 2.0 * x.sqrt().asin(),
        }
    }

    pub fn v_inverse(&self, y: f64) -> f64 {
        match self {
            ConjugationMap::Identity => y,
            ConjugationMap::Feller => 0.25 * y * y,
            ConjugationMap::WrightFisher => (0.5 * y).sin().powi(2),
        }
    }

    pub fn v_prime(&self, x: f64) -> f64 {
        match self {
            ConjugationMap::Identity => 1.0,
            ConjugationMap::Feller => 1.0 / x.sqrt(),
            ConjugationMap::WrightFisher => 1.0 / (x * (1.0 - x)).sqrt(),
        }
    }

    /// Domain of `v` in the original coordinates.
    pub fn domain(&self) -> (f64, f64) {
        match self {
            ConjugationMap::Identity | ConjugationMap::Feller => (0.0, f64::INFINITY),
            ConjugationMap::WrightFisher => (0.0, 1.0),
        }
    }

    /// Image `v(domain)`.
    pub fn image(&self) -> (f64, f64) {
        let (lo, hi) = self.domain();
        (self.v(lo), if hi.is_finite() { self.v(hi) } else { f64::INFINITY })
    }

    fn check(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if x >= lo && x <= hi {
            Ok(())
        } else {
            Err(Error::domain(format!("x = {x} outside the domain [{lo}, {hi}] of the map")))
        }
    }
}

/// Law of `v⁻¹(η̃)` where `η̃` follows `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConjugatedDensity {
    pub map: ConjugationMap,
    pub base: DensityFamily,
}

impl ConjugatedDensity {
    /// `g(x) = g̃(v(x)) v'(x)` for continuous bases.
    pub fn pdf(&self, x: f64) -> f64 {
        let (lo, hi) = self.map.domain();
        if !(x > lo && x < hi) {
            return 0.0;
        }
        if self.base.is_discrete() {
            return self.base.pdf(self.map.v(x));
        }
        self.base.pdf(self.map.v(x)) * self.map.v_prime(x)
    }

    pub fn support(&self) -> (f64, f64) {
        let (lo, hi) = self.base.support();
        (self.map.v_inverse(lo), self.map.v_inverse(hi))
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.map.v_inverse(self.base.sample(rng))
    }

    pub fn expect<T, F>(&self, f: F, cfg: &QuadConfig) -> Result<QuadResult<T>>
    where
        T: QuadValue,
        F: Fn(f64) -> T,
    {
        self.base.expect(|y| f(self.map.v_inverse(y)), cfg)
    }

    /// The same law as a plain family, when one exists.
    pub fn to_family(&self) -> Option<DensityFamily> {
        if self.map == ConjugationMap::Identity {
            return Some(self.base.clone());
        }
        let atoms = self.base.atoms()?;
        if atoms.len() == 1 {
            return DensityFamily::point_mass(self.map.v_inverse(atoms[0].0)).ok();
        }
        let w = atoms[0].1;
        if atoms.iter().all(|a| (a.1 - w).abs() < 1e-15) {
            return DensityFamily::discrete_uniform(atoms.iter().map(|a| self.map.v_inverse(a.0)).collect()).ok();
        }
        None
    }
}

/// Pull a density on the BM scale back to the original scale.
pub fn conjugate_transform(map: ConjugationMap, base: &DensityFamily) -> Result<ConjugatedDensity> {
    let (lo, hi) = base.support();
    let (ilo, ihi) = map.image();
    if lo < ilo || hi > ihi {
        return Err(Error::domain(format!(
            "base support [{lo}, {hi}] not inside the image [{ilo}, {ihi}] of the map"
        )));
    }
    Ok(ConjugatedDensity {
        map,
        base: base.clone(),
    })
}

/// Exit probability through 0 of the conjugated process, via driftless BM on `(0, v(b))`.
pub fn pi0_conjugated(x: f64, map: ConjugationMap, reset: &ResetSpec, b: f64) -> Result<f64> {
    map.check(b)?;
    if !(x >= 0.0 && x <= b) {
        return Err(Error::domain(format!("x = {x} outside [0, {b}]")));
    }
    let x_r = reset.fixed_position()?;
    map.check(x_r)?;
    pi0_bm(map.v(x), 0.0, &ResetSpec::fixed(reset.rate, map.v(x_r)), map.v(b))
}
