//! Command-line front end: scenario files in, JSON or CSV out.
//!
//! Exit codes: 0 ok, 1 verify failure, 2 input or domain error, 3 numerical
//! failure, 4 censoring warning under `--strict`.

pub mod verify;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analytic::{pi0_bm, DiffusionModel, Interval, ResetPosition, ResetSpec};
use crate::densities::DensityFamily;
use crate::error::{Error, Result};
use crate::forward::{
    mean_fet_case1_general, mean_fpt_case1, q_case1_general, ForwardPoint, ForwardRequest,
};
use crate::inverse::{solve, InverseProblem, InverseSolution};
use crate::simulate::{simulate_exit, simulate_fpt, Estimate, SimConfig};

pub use verify::{run_verify, Check, VerifyReport};

pub const SCHEMA_VERSION: u32 = 1;
pub const THREADS_ENV: &str = "RESET_FPT_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_STRICT_CENSORING: i32 = 4;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SimTarget {
    /// First passage through `barrier` from above.
    Passage {
        #[serde(default)]
        barrier: f64,
    },
    Exit { interval: Interval },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationRequest {
    pub model: DiffusionModel,
    pub start: ResetPosition,
    pub reset: ResetSpec,
    pub target: SimTarget,
    #[serde(default)]
    pub config: SimConfig,
    /// Where to dump the passage times (CSV, one column).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Request {
    Forward(ForwardRequest),
    Inverse(InverseProblem),
    Simulate(SimulationRequest),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema_version: u32,
    pub name: String,
    pub request: Request,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text)?;
        if s.schema_version != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "schema_version {} not supported (expected {SCHEMA_VERSION})",
                s.schema_version
            )));
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }
}

#[derive(Debug, Parser)]
#[command(name = "reset-fpt", version, about = "First-passage functionals and inverse problems for diffusions with resetting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub options: Options,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Scenario file (JSON).
    #[arg(long, global = true)]
    pub scenario: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of simulated paths.
    #[arg(long, global = true)]
    pub paths: Option<u64>,
    /// Simulation time step.
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    /// Fail with exit code 4 when a simulation is heavily censored.
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Evaluate exit probabilities, mean times or passage-time transforms.
    Forward,
    /// Solve an inverse problem.
    Inverse,
    /// Monte Carlo estimates.
    Simulate,
    /// Replay the worked examples.
    Verify {
        /// Only cases whose id starts with this.
        filter: Option<String>,
    },
}

/// Caps rayon's global pool from `RESET_FPT_THREADS`.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

#[derive(Serialize)]
struct ErrorReport<'a> {
    error: &'a str,
    message: String,
    exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    range: Option<[f64; 2]>,
}

/// Machine-readable error line for stderr.
pub fn error_json(e: &Error) -> String {
    let range = match e {
        Error::Range { lo, hi, .. } => Some([*lo, *hi]),
        _ => None,
    };
    serde_json::to_string(&ErrorReport {
        error: e.kind(),
        message: e.to_string(),
        exit_code: e.exit_code(),
        range,
    })
    .expect("error report serializes")
}

/// Parses nothing, runs one command, returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = configure_threads().and_then(|_| match &cli.command {
        Command::Verify { filter } => cmd_verify(filter.as_deref(), &cli.options),
        cmd => {
            let path = cli
                .options
                .scenario
                .as_ref()
                .ok_or_else(|| Error::Config("--scenario <path> is required".into()))?;
            let scenario = Scenario::load(path)?;
            match cmd {
                Command::Forward => cmd_forward(&scenario, &cli.options),
                Command::Inverse => cmd_inverse(&scenario, &cli.options),
                Command::Simulate => cmd_simulate(&scenario, &cli.options),
                Command::Verify { .. } => unreachable!(),
            }
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", error_json(&e));
            e.exit_code()
        }
    }
}

fn format_of(scenario: Option<&Scenario>, opts: &Options) -> Format {
    opts.format
        .or_else(|| scenario.and_then(|s| s.output.as_ref()).map(|o| o.format))
        .unwrap_or_default()
}

fn emit(text: &str, scenario: Option<&Scenario>, opts: &Options) -> Result<()> {
    let path = opts
        .out
        .clone()
        .or_else(|| scenario.and_then(|s| s.output.as_ref()).and_then(|o| o.path.clone()));
    match path {
        Some(p) => std::fs::write(&p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("output serializes");
    s.push('\n');
    s
}

fn csv_text(header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        w.write_record(&r).map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}

fn num(v: f64) -> String {
    format!("{v}")
}

#[derive(Serialize)]
struct ForwardOutput<'a> {
    scenario: &'a str,
    points: Vec<ForwardPoint>,
}

pub fn cmd_forward(scenario: &Scenario, opts: &Options) -> Result<i32> {
    let Request::Forward(req) = &scenario.request else {
        return Err(Error::Config("scenario does not hold a forward request".into()));
    };
    let points = req.evaluate()?;
    let text = match format_of(Some(scenario), opts) {
        Format::Json => json(&ForwardOutput {
            scenario: &scenario.name,
            points,
        }),
        Format::Csv => csv_text(
            &["lambda", "value", "error", "route"],
            points
                .iter()
                .map(|p| {
                    vec![
                        p.lambda.map(num).unwrap_or_default(),
                        num(p.value),
                        num(p.error),
                        serde_json::to_value(p.route)
                            .ok()
                            .and_then(|v| v.as_str().map(String::from))
                            .unwrap_or_default(),
                    ]
                })
                .collect(),
        )?,
    };
    emit(&text, Some(scenario), opts)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct InverseOutput<'a> {
    scenario: &'a str,
    #[serde(flatten)]
    solution: &'a InverseSolution,
}

fn as_str<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(String::from))
        .unwrap_or_default()
}

pub fn cmd_inverse(scenario: &Scenario, opts: &Options) -> Result<i32> {
    let Request::Inverse(p) = &scenario.request else {
        return Err(Error::Config("scenario does not hold an inverse problem".into()));
    };
    let sol = solve(p)?;
    let text = match format_of(Some(scenario), opts) {
        Format::Json => json(&InverseOutput {
            scenario: &scenario.name,
            solution: &sol,
        }),
        Format::Csv => {
            let mut rows = vec![
                vec!["status".into(), as_str(&sol.status)],
                vec!["family".into(), sol.family.name().into()],
                vec!["residual".into(), num(sol.residual)],
                vec!["objective".into(), as_str(&sol.objective)],
            ];
            for (k, v) in &sol.parameters {
                rows.push(vec![format!("param.{k}"), num(*v)]);
            }
            if let Some(v) = sol.replay.value {
                rows.push(vec!["replay".into(), num(v)]);
            }
            csv_text(&["key", "value"], rows)?
        }
    };
    emit(&text, Some(scenario), opts)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SimulationOutput<'a> {
    scenario: &'a str,
    seed: u64,
    n_paths: u64,
    dt: f64,
    t_max: f64,
    censoring_warning: bool,
    estimates: BTreeMap<String, Estimate>,
    /// Analytic values, where a closed route exists.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    reference: BTreeMap<String, f64>,
}

fn start_law(start: &ResetPosition) -> Result<DensityFamily> {
    match start {
        ResetPosition::Fixed(x) => DensityFamily::point_mass(*x),
        ResetPosition::Random(g) => Ok(g.clone()),
    }
}

// Analytic values to print next to the estimates, when a closed route exists.
fn reference(req: &SimulationRequest, start: &DensityFamily) -> Vec<(String, f64)> {
    let mut out = Vec::new();
    if !matches!(req.reset.position, ResetPosition::Fixed(_)) || req.reset.rate <= 0.0 {
        return out;
    }
    match &req.target {
        SimTarget::Passage { barrier } if *barrier == 0.0 => {
            if let (Some(mu), ResetPosition::Fixed(x_r)) = (req.model.bm_drift(), &req.reset.position) {
                if let Ok(v) = mean_fpt_case1(start, mu, &ResetSpec::fixed(req.reset.rate, *x_r)) {
                    out.push(("mean_fpt".into(), v.value));
                }
            }
        }
        SimTarget::Exit { interval } => {
            let pi0 = match (&req.start, req.model.bm_drift()) {
                (ResetPosition::Fixed(x), Some(mu)) if interval.lo == 0.0 => {
                    pi0_bm(*x, mu, &req.reset, interval.hi).ok()
                }
                _ => q_case1_general(start, &req.model, &req.reset, interval).ok().map(|v| v.value),
            };
            if let Some(v) = pi0 {
                out.push(("pi0".into(), v));
            }
            if let Ok(v) = mean_fet_case1_general(start, &req.model, &req.reset, interval) {
                out.push(("mean_fet".into(), v.value));
            }
        }
        _ => {}
    }
    out
}

pub fn cmd_simulate(scenario: &Scenario, opts: &Options) -> Result<i32> {
    let Request::Simulate(req) = &scenario.request else {
        return Err(Error::Config("scenario does not hold a simulation request".into()));
    };
    let mut cfg = req.config.clone();
    if let Some(s) = opts.seed {
        cfg.seed = s;
    }
    if let Some(n) = opts.paths {
        cfg.n_paths = n;
    }
    if let Some(dt) = opts.dt {
        cfg.dt = dt;
    }
    let start = start_law(&req.start)?;
    let (estimates, t_max, warning) = match &req.target {
        SimTarget::Passage { barrier } => {
            let s = simulate_fpt(&req.model, &start, &req.reset, *barrier, &cfg)?;
            if let Some(p) = &req.samples {
                s.write_csv(p)?;
            }
            (vec![("mean_fpt".to_string(), s.mean)], s.t_max, s.censoring_warning)
        }
        SimTarget::Exit { interval } => {
            let e = simulate_exit(&req.model, &start, &req.reset, interval, &cfg)?;
            (
                vec![("pi0".to_string(), e.pi0), ("mean_fet".to_string(), e.mean_fet)],
                e.t_max,
                e.censoring_warning,
            )
        }
    };
    let reference = reference(req, &start);
    let text = match format_of(Some(scenario), opts) {
        Format::Json => json(&SimulationOutput {
            scenario: &scenario.name,
            seed: cfg.seed,
            n_paths: cfg.n_paths,
            dt: cfg.dt,
            t_max,
            censoring_warning: warning,
            estimates: estimates.iter().cloned().collect(),
            reference: reference.iter().cloned().collect(),
        }),
        Format::Csv => csv_text(
            &["quantity", "value", "std_error", "n", "method", "censored_fraction", "reference"],
            estimates
                .iter()
                .map(|(k, e)| {
                    let r = reference.iter().find(|(n, _)| n == k).map(|(_, v)| num(*v));
                    vec![
                        k.clone(),
                        num(e.value),
                        num(e.std_error),
                        e.n_effective.to_string(),
                        as_str(&e.method),
                        num(e.censored_fraction),
                        r.unwrap_or_default(),
                    ]
                })
                .collect(),
        )?,
    };
    emit(&text, Some(scenario), opts)?;
    if warning {
        eprintln!(
            "{}",
            serde_json::json!({"warning": "censoring", "t_max": t_max, "strict": opts.strict})
        );
        if opts.strict {
            return Ok(EXIT_STRICT_CENSORING);
        }
    }
    Ok(EXIT_OK)
}

/// Human-readable table of a verify report.
pub fn verify_table(report: &VerifyReport) -> String {
    let mut s = format!(
        "{:<14} {:<34} {:>14} {:>14} {:>10} {}\n",
        "case", "quantity", "expected", "computed", "tolerance", "result"
    );
    for c in &report.checks {
        let tol = if c.relative {
            format!("{:.0e} rel", c.tolerance)
        } else {
            format!("{:.0e}", c.tolerance)
        };
        s.push_str(&format!(
            "{:<14} {:<34} {:>14.6} {:>14.6} {:>10} {}\n",
            c.id,
            c.quantity,
            c.expected,
            c.computed,
            tol,
            match (c.printed, c.pass) {
                (false, true) => "PASS",
                (false, false) => "FAIL",
                (true, true) => "printed ok",
                (true, false) => "printed differs",
            }
        ));
    }
    let failed = report.checks.iter().filter(|c| !c.pass && !c.printed).count();
    s.push_str(&format!(
        "{} cases, {} checks, {} failed, {} printed values differ\n",
        report.cases,
        report.checks.len(),
        failed,
        report.printed_differences
    ));
    s
}

pub fn cmd_verify(filter: Option<&str>, opts: &Options) -> Result<i32> {
    let report = run_verify(filter);
    if report.cases == 0 {
        return Err(Error::Config(format!("no verify case matches `{}`", filter.unwrap_or(""))));
    }
    let machine = match format_of(None, opts) {
        Format::Json => json(&report),
        Format::Csv => csv_text(
            &["id", "quantity", "expected", "computed", "tolerance", "relative", "pass", "printed"],
            report
                .checks
                .iter()
                .map(|c| {
                    vec![
                        c.id.clone(),
                        c.quantity.clone(),
                        num(c.expected),
                        num(c.computed),
                        num(c.tolerance),
                        c.relative.to_string(),
                        c.pass.to_string(),
                        c.printed.to_string(),
                    ]
                })
                .collect(),
        )?,
    };
    match &opts.out {
        Some(_) => {
            emit(&machine, None, opts)?;
            print!("{}", verify_table(&report));
        }
        None if opts.format.is_some() => emit(&machine, None, opts)?,
        None => print!("{}", verify_table(&report)),
    }
    Ok(if report.passed { EXIT_OK } else { EXIT_VERIFY_FAILED })
}
