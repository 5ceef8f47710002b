// Monte Carlo estimates next to the analytic values. Set RESET_FPT_THREADS
// to change the worker count; the numbers do not change.

use reset_fpt::analytic::{mean_fet_bm, mean_fpt_bm, pi0_bm, DiffusionModel, Interval, ResetSpec};
use reset_fpt::simulate::{estimate_lt, simulate_exit, simulate_fpt, SimConfig};
use reset_fpt::analytic::fpt_lt_bm;
use reset_fpt::{DensityFamily, Result};

pub fn run_with(n_paths: u64) -> Result<Vec<(f64, f64, f64)>> {
    let (mu, x, b) = (0.2, 0.4, 1.0);
    let reset = ResetSpec::fixed(1.0, 0.6);
    let model = DiffusionModel::brownian(mu);
    let start = DensityFamily::point_mass(x)?;
    let cfg = SimConfig::new(n_paths, 1e-4, 42);

    let exit = simulate_exit(&model, &start, &reset, &Interval::unit(b)?, &cfg)?;
    let fpt = simulate_fpt(&model, &start, &reset, 0.0, &cfg)?;
    let lt = estimate_lt(&fpt, 1.0)?;
    let rows = vec![
        (exit.pi0.value, exit.pi0.std_error, pi0_bm(x, mu, &reset, b)?),
        (exit.mean_fet.value, exit.mean_fet.std_error, mean_fet_bm(x, mu, &reset, b)?),
        (fpt.mean.value, fpt.mean.std_error, mean_fpt_bm(x, mu, &reset)?),
        (lt.value, lt.std_error, fpt_lt_bm(1.0, x, mu, &reset)?),
    ];
    println!("{:<14} {:>10} {:>10} {:>10}", "quantity", "estimate", "std err", "analytic");
    for (name, (v, se, a)) in ["pi0", "E[tau_0,b]", "E[tau]", "E[exp(-tau)]"].iter().zip(&rows) {
        println!("{name:<14} {v:>10.5} {se:>10.5} {a:>10.5}");
    }
    Ok(rows)
}

pub fn run() -> Result<Vec<(f64, f64, f64)>> {
    run_with(20_000)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run().map(|_| ())
}
