//! Euler–Maruyama Monte Carlo for diffusions with Poissonian resetting.
//!
//! Reset epochs come from exact exponential clocks and each Euler step is cut
//! at the next epoch. Barrier crossings inside a step are caught by the
//! Brownian-bridge probability `exp(-2 Δ₁ Δ₂ / (σ² dt))`.

mod philox;

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::bm::{mean_fpt_kernel, BmResetCoefficients};
use crate::analytic::{DiffusionModel, Interval, ResetPosition, ResetSpec};
use crate::densities::DensityFamily;
use crate::error::{Error, Result};

pub use philox::{philox4x32_10, PathRng};

/// Censored fraction above which results carry a warning.
pub const CENSORING_WARNING: f64 = 1e-3;
const BRIDGE_CUTOFF: f64 = 40.0;

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_paths: u64,
    pub dt: f64,
    /// Censoring horizon; chosen from the model when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub antithetic: bool,
    #[serde(default = "default_true")]
    pub bridge: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            n_paths: 100_000,
            dt: 1e-4,
            t_max: None,
            seed: 0,
            antithetic: false,
            bridge: true,
        }
    }
}

impl SimConfig {
    pub fn new(n_paths: u64, dt: f64, seed: u64) -> Self {
        SimConfig {
            n_paths,
            dt,
            seed,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_paths < 1 {
            return Err(Error::Config("n_paths must be >= 1".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be > 0, got {}", self.dt)));
        }
        if let Some(t) = self.t_max {
            if !(t > 0.0) {
                return Err(Error::Config(format!("t_max must be > 0, got {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "analytic")]
    Analytic,
    #[serde(rename = "quadrature")]
    Quadrature,
    #[serde(rename = "monte-carlo")]
    MonteCarlo,
}

/// A number with its uncertainty and where it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    #[serde(rename = "n")]
    pub n_effective: u64,
    pub method: Method,
    pub censored_fraction: f64,
    /// Largest possible contribution of censored paths.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bias_bound: Option<f64>,
}

impl Estimate {
    /// `|value - other| <= k * std_error + allowance`.
    pub fn agrees_with(&self, other: f64, k: f64, allowance: f64) -> bool {
        (self.value - other).abs() <= k * self.std_error + allowance
    }
}

/// Simulated first-passage times; censored paths hold `+∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct FptSample {
    pub times: Vec<f64>,
    pub t_max: f64,
    pub mean: Estimate,
    pub censoring_warning: bool,
    antithetic: bool,
}

impl FptSample {
    pub fn censored_fraction(&self) -> f64 {
        self.mean.censored_fraction
    }

    /// Flat little-endian `f64` dump.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(8 * self.times.len());
        for t in &self.times {
            bytes.extend_from_slice(&t.to_le_bytes());
        }
        std::fs::write(path, bytes)?;
        Ok(())
    }

    pub fn read_binary(path: &Path) -> Result<Vec<f64>> {
        let bytes = std::fs::read(path)?;
        if bytes.len() % 8 != 0 {
            return Err(Error::Io("binary sample file length is not a multiple of 8".into()));
        }
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect())
    }

    /// One column `fpt`, censored rows written as `inf`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "fpt")?;
        for t in &self.times {
            writeln!(f, "{t:.16e}")?;
        }
        f.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExitEstimates {
    pub pi0: Estimate,
    pub mean_fet: Estimate,
    pub t_max: f64,
    pub censoring_warning: bool,
}

#[derive(Clone, Copy)]
struct Outcome {
    time: f64,
    low: bool,
}

struct PathSpec<'a> {
    model: &'a DiffusionModel,
    start: &'a DensityFamily,
    reset: &'a ResetSpec,
    lo: f64,
    hi: f64,
    dt: f64,
    t_max: f64,
    bridge: bool,
}

impl PathSpec<'_> {
    fn reset_target<R: Rng>(&self, rng: &mut R) -> f64 {
        match &self.reset.position {
            ResetPosition::Fixed(x) => *x,
            ResetPosition::Random(h) => h.sample(rng),
        }
    }

    fn clock<R: Rng>(&self, rng: &mut R) -> f64 {
        if self.reset.rate > 0.0 {
            let e: f64 = Exp1.sample(rng);
            e / self.reset.rate
        } else {
            f64::INFINITY
        }
    }

    fn run(&self, rng: &mut PathRng, flip: bool) -> Outcome {
        let sign = if flip { -1.0 } else { 1.0 };
        let mut x = self.start.sample(rng);
        if x <= self.lo {
            return Outcome { time: 0.0, low: true };
        }
        if x >= self.hi {
            return Outcome { time: 0.0, low: false };
        }
        let mut t = 0.0;
        let mut next_reset = self.clock(rng);
        loop {
            let step = self.dt.min(next_reset - t).min(self.t_max - t);
            let mu = self.model.drift(x);
            let sigma = self.model.diffusion(x);
            let z: f64 = StandardNormal.sample(rng);
            let x_new = x + mu * step + sigma * step.sqrt() * z * sign;
            if x_new <= self.lo {
                return Outcome {
                    time: t + step * (x - self.lo) / (x - x_new),
                    low: true,
                };
            }
            if x_new >= self.hi {
                return Outcome {
                    time: t + step * (self.hi - x) / (x_new - x),
                    low: false,
                };
            }
            if self.bridge {
                let s2 = sigma * sigma * step;
                let e_lo = 2.0 * (x - self.lo) * (x_new - self.lo) / s2;
                if e_lo < BRIDGE_CUTOFF && rng.random::<f64>() < (-e_lo).exp() {
                    return Outcome {
                        time: t + 0.5 * step,
                        low: true,
                    };
                }
                if self.hi.is_finite() {
                    let e_hi = 2.0 * (self.hi - x) * (self.hi - x_new) / s2;
                    if e_hi < BRIDGE_CUTOFF && rng.random::<f64>() < (-e_hi).exp() {
                        return Outcome {
                            time: t + 0.5 * step,
                            low: false,
                        };
                    }
                }
            }
            t += step;
            x = x_new;
            if t >= self.t_max {
                return Outcome {
                    time: f64::INFINITY,
                    low: false,
                };
            }
            if t >= next_reset {
                x = self.reset_target(rng);
                next_reset = t + self.clock(rng);
            }
        }
    }
}

fn run_paths(spec: &PathSpec<'_>, cfg: &SimConfig) -> Vec<Outcome> {
    (0..cfg.n_paths)
        .into_par_iter()
        .map(|i| {
            if cfg.antithetic {
                let mut rng = PathRng::new(cfg.seed, i / 2);
                spec.run(&mut rng, i % 2 == 1)
            } else {
                let mut rng = PathRng::new(cfg.seed, i);
                spec.run(&mut rng, false)
            }
        })
        .collect()
}

/// Mean and standard error; antithetic pairs are averaged first.
fn mean_se(values: &[f64], paired: bool) -> (f64, f64, u64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN, 0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let units: Vec<f64> = if paired && n >= 4 {
        values.chunks_exact(2).map(|p| 0.5 * (p[0] + p[1])).collect()
    } else {
        values.to_vec()
    };
    let m = units.len();
    if m < 2 {
        return (mean, f64::INFINITY, n as u64);
    }
    let um = units.iter().sum::<f64>() / m as f64;
    let var = units.iter().map(|v| (v - um) * (v - um)).sum::<f64>() / (m - 1) as f64;
    (mean, (var / m as f64).sqrt(), n as u64)
}

fn check_reset_inside(reset: &ResetSpec, lo: f64, hi: f64) -> Result<()> {
    reset.validate()?;
    if reset.rate == 0.0 {
        return Ok(());
    }
    let ok = match &reset.position {
        ResetPosition::Fixed(x) => *x > lo && *x < hi,
        ResetPosition::Random(h) => {
            let (a, b) = h.support();
            if h.is_discrete() {
                a > lo && b < hi
            } else {
                a >= lo && b <= hi
            }
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("reset landing outside ({lo}, {hi})")))
    }
}

fn resolve_t_max(cfg: &SimConfig, analytic_mean: Option<f64>, r: f64) -> Result<f64> {
    let t = match (cfg.t_max, analytic_mean) {
        (Some(t), _) => t,
        (None, Some(m)) if m.is_finite() && m > 0.0 => 50.0 * m,
        (None, _) if r > 0.0 => 50.0 / r,
        _ => return Err(Error::Config("t_max required when r = 0 and no analytic mean is known".into())),
    };
    if cfg.dt >= t {
        return Err(Error::Config(format!("dt = {} must be smaller than t_max = {t}", cfg.dt)));
    }
    Ok(t)
}

/// First passage through `barrier` from above.
pub fn simulate_fpt(
    model: &DiffusionModel,
    start: &DensityFamily,
    reset: &ResetSpec,
    barrier: f64,
    cfg: &SimConfig,
) -> Result<FptSample> {
    cfg.validate()?;
    model.validate()?;
    check_reset_inside(reset, barrier, f64::INFINITY)?;
    if start.support().0 < barrier {
        return Err(Error::Config(format!("start law reaches below the barrier {barrier}")));
    }
    let analytic = match (model.bm_drift(), &reset.position) {
        (Some(mu), ResetPosition::Fixed(x_r)) if reset.rate > 0.0 => {
            let (_, top) = start.support();
            let x = if top.is_finite() { top } else { start.upper_quantile(1e-6) };
            Some(mean_fpt_kernel(x - barrier, mu, reset.rate, x_r - barrier))
        }
        (Some(mu), _) if reset.rate == 0.0 && mu < 0.0 => Some((start.mean() - barrier) / -mu),
        _ => None,
    };
    let t_max = resolve_t_max(cfg, analytic, reset.rate)?;
    let spec = PathSpec {
        model,
        start,
        reset,
        lo: barrier,
        hi: f64::INFINITY,
        dt: cfg.dt,
        t_max,
        bridge: cfg.bridge,
    };
    let out = run_paths(&spec, cfg);
    let times: Vec<f64> = out.iter().map(|o| o.time).collect();
    let censored = times.iter().filter(|t| t.is_infinite()).count();
    let frac = censored as f64 / times.len() as f64;
    let finite: Vec<f64> = times.iter().copied().filter(|t| t.is_finite()).collect();
    let (value, se, n) = mean_se(&finite, cfg.antithetic && censored == 0);
    Ok(FptSample {
        times,
        t_max,
        mean: Estimate {
            value,
            std_error: se,
            n_effective: n,
            method: Method::MonteCarlo,
            censored_fraction: frac,
            bias_bound: None,
        },
        censoring_warning: frac > CENSORING_WARNING,
        antithetic: cfg.antithetic,
    })
}

/// Exit through either end of `interval`.
pub fn simulate_exit(
    model: &DiffusionModel,
    start: &DensityFamily,
    reset: &ResetSpec,
    interval: &Interval,
    cfg: &SimConfig,
) -> Result<ExitEstimates> {
    cfg.validate()?;
    model.validate()?;
    interval.validate()?;
    check_reset_inside(reset, interval.lo, interval.hi)?;
    let (a, b) = start.support();
    if a < interval.lo || b > interval.hi {
        return Err(Error::Config(format!(
            "start law support [{a}, {b}] not inside [{}, {}]",
            interval.lo, interval.hi
        )));
    }
    let analytic = match (model.bm_drift(), &reset.position) {
        (Some(mu), ResetPosition::Fixed(x_r)) if reset.rate > 0.0 => {
            let w = interval.width();
            BmResetCoefficients::new(mu, reset.rate, x_r - interval.lo, w)
                .ok()
                .map(|c| {
                    (0..=32)
                        .map(|i| c.mean_fet(w * i as f64 / 32.0).unwrap_or(0.0))
                        .fold(0.0, f64::max)
                })
        }
        _ => None,
    };
    let t_max = resolve_t_max(cfg, analytic, reset.rate)?;
    let spec = PathSpec {
        model,
        start,
        reset,
        lo: interval.lo,
        hi: interval.hi,
        dt: cfg.dt,
        t_max,
        bridge: cfg.bridge,
    };
    let out = run_paths(&spec, cfg);
    let n = out.len();
    let censored = out.iter().filter(|o| o.time.is_infinite()).count();
    let frac = censored as f64 / n as f64;
    let low: Vec<f64> = out.iter().map(|o| if o.low { 1.0 } else { 0.0 }).collect();
    let (p, p_se, pn) = mean_se(&low, cfg.antithetic);
    let finite: Vec<f64> = out.iter().map(|o| o.time).filter(|t| t.is_finite()).collect();
    let (m, m_se, mn) = mean_se(&finite, cfg.antithetic && censored == 0);
    Ok(ExitEstimates {
        pi0: Estimate {
            value: p,
            std_error: p_se,
            n_effective: pn,
            method: Method::MonteCarlo,
            censored_fraction: frac,
            bias_bound: (censored > 0).then_some(frac),
        },
        mean_fet: Estimate {
            value: m,
            std_error: m_se,
            n_effective: mn,
            method: Method::MonteCarlo,
            censored_fraction: frac,
            bias_bound: None,
        },
        t_max,
        censoring_warning: frac > CENSORING_WARNING,
    })
}

/// Sample average of `e^{-λτ}`; censored paths count as 0 and their largest
/// possible contribution `frac · e^{-λ t_max}` is reported as `bias_bound`.
pub fn estimate_lt(sample: &FptSample, lambda: f64) -> Result<Estimate> {
    if sample.times.is_empty() {
        return Err(Error::Config("empty sample".into()));
    }
    if !(lambda >= 0.0) {
        return Err(Error::domain(format!("lambda must be >= 0, got {lambda}")));
    }
    let v: Vec<f64> = sample
        .times
        .iter()
        .map(|&t| if t.is_finite() { (-lambda * t).exp() } else { 0.0 })
        .collect();
    let frac = sample.censored_fraction();
    let (value, se, n) = mean_se(&v, sample.antithetic);
    Ok(Estimate {
        value,
        std_error: se,
        n_effective: n,
        method: Method::MonteCarlo,
        censored_fraction: frac,
        bias_bound: Some(frac * (-lambda * sample.t_max).exp()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{fpt_lt_bm, mean_fpt_bm, pi0_bm};

    fn cfg(n: u64, dt: f64, seed: u64) -> SimConfig {
        SimConfig::new(n, dt, seed)
    }

    #[test]
    fn start_at_barrier_is_zero() {
        let s = simulate_fpt(
            &DiffusionModel::brownian(0.0),
            &DensityFamily::point_mass(0.0).unwrap(),
            &ResetSpec::fixed(1.0, 1.0),
            0.0,
            &cfg(100, 1e-3, 1),
        )
        .unwrap();
        assert!(s.times.iter().all(|&t| t == 0.0));
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    simulate_fpt(
                        &DiffusionModel::brownian(-0.5),
                        &DensityFamily::uniform(0.1, 0.3).unwrap(),
                        &ResetSpec::fixed(2.0, 0.2),
                        0.0,
                        &cfg(2000, 1e-3, 7),
                    )
                    .unwrap()
                    .times
                })
        };
        let a = run(1);
        let b = run(3);
        assert_eq!(a.len(), b.len());
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
    }

    #[test]
    fn mean_fpt_agrees_with_closed_form() {
        let (mu, r, x_r, x) = (0.0, 20.0, 0.06, 0.05);
        let reset = ResetSpec::fixed(r, x_r);
        let s = simulate_fpt(
            &DiffusionModel::brownian(mu),
            &DensityFamily::point_mass(x).unwrap(),
            &reset,
            0.0,
            &cfg(40_000, 1e-5, 11),
        )
        .unwrap();
        let exact = mean_fpt_bm(x, mu, &reset).unwrap();
        assert!(s.mean.agrees_with(exact, 4.0, 0.0), "{:?} vs {exact}", s.mean);
        let lt = estimate_lt(&s, 10.0).unwrap();
        let exact_lt = fpt_lt_bm(10.0, x, mu, &reset).unwrap();
        assert!(lt.agrees_with(exact_lt, 4.0, 0.0), "{lt:?} vs {exact_lt}");
    }

    #[test]
    fn classical_mean_without_reset() {
        let s = simulate_fpt(
            &DiffusionModel::brownian(-4.0),
            &DensityFamily::point_mass(0.2).unwrap(),
            &ResetSpec::fixed(0.0, 1.0),
            0.0,
            &cfg(20_000, 1e-4, 3),
        )
        .unwrap();
        assert!(s.mean.agrees_with(0.05, 4.0, 5e-4), "{:?}", s.mean);
    }

    #[test]
    fn exit_probability_symmetric_case() {
        let e = simulate_exit(
            &DiffusionModel::brownian(0.0),
            &DensityFamily::point_mass(0.15).unwrap(),
            &ResetSpec::fixed(1.0, 0.15),
            &Interval::unit(0.3).unwrap(),
            &cfg(20_000, 1e-5, 5),
        )
        .unwrap();
        assert!(e.pi0.agrees_with(0.5, 4.0, 0.0), "{:?}", e.pi0);
        let exact = pi0_bm(0.1, 0.6, &ResetSpec::fixed(3.0, 0.2), 0.3).unwrap();
        let e = simulate_exit(
            &DiffusionModel::brownian(0.6),
            &DensityFamily::point_mass(0.1).unwrap(),
            &ResetSpec::fixed(3.0, 0.2),
            &Interval::unit(0.3).unwrap(),
            &cfg(20_000, 1e-5, 6),
        )
        .unwrap();
        assert!(e.pi0.agrees_with(exact, 4.0, 0.0), "{:?} vs {exact}", e.pi0);
    }

    #[test]
    fn transform_edges() {
        let s = simulate_fpt(
            &DiffusionModel::brownian(-1.0),
            &DensityFamily::point_mass(0.05).unwrap(),
            &ResetSpec::fixed(5.0, 0.05),
            0.0,
            &cfg(500, 1e-4, 2),
        )
        .unwrap();
        assert_eq!(s.censored_fraction(), 0.0);
        assert_eq!(estimate_lt(&s, 0.0).unwrap().value, 1.0);
        assert!(estimate_lt(&s, 1e9).unwrap().value < 1e-3);
    }

    #[test]
    fn config_errors() {
        let m = DiffusionModel::brownian(0.0);
        let start = DensityFamily::point_mass(0.5).unwrap();
        let mut c = cfg(10, 1.0, 0);
        c.t_max = Some(0.5);
        assert!(matches!(
            simulate_fpt(&m, &start, &ResetSpec::fixed(1.0, 1.0), 0.0, &c),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            simulate_exit(
                &m,
                &start,
                &ResetSpec::random(1.0, DensityFamily::uniform(0.0, 2.0).unwrap()),
                &Interval::unit(1.0).unwrap(),
                &cfg(10, 1e-3, 0)
            ),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn sample_export_round_trip() {
        let s = simulate_fpt(
            &DiffusionModel::brownian(0.0),
            &DensityFamily::point_mass(0.05).unwrap(),
            &ResetSpec::fixed(5.0, 0.05),
            0.0,
            &cfg(50, 1e-4, 9),
        )
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("fpt.bin");
        s.write_binary(&p).unwrap();
        assert_eq!(FptSample::read_binary(&p).unwrap(), s.times);
        let c = dir.path().join("fpt.csv");
        s.write_csv(&c).unwrap();
        assert_eq!(std::fs::read_to_string(&c).unwrap().lines().count(), 51);
    }

    #[test]
    fn estimate_json_shape() {
        let e = Estimate {
            value: 0.5,
            std_error: 0.01,
            n_effective: 10,
            method: Method::MonteCarlo,
            censored_fraction: 0.0,
            bias_bound: None,
        };
        let j = serde_json::to_value(e).unwrap();
        assert_eq!(
            j,
            serde_json::json!({"value":0.5,"std_error":0.01,"n":10,"method":"monte-carlo","censored_fraction":0.0})
        );
    }
}
