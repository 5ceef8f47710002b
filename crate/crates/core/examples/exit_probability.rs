// Probability of leaving (0, 1) through 0 when the start is uniform and the
// process resets to `x_R`, for several reset positions and drifts.

use reset_fpt::analytic::ResetSpec;
use reset_fpt::forward::{q_case1, q_case1_with, ForwardOptions};
use reset_fpt::{DensityFamily, Result};

pub fn run() -> Result<Vec<(f64, f64, f64)>> {
    let g = DensityFamily::uniform(0.0, 1.0)?;
    let mut rows = Vec::new();
    println!("{:>6} {:>6} {:>12} {:>12}", "mu", "x_R", "closed", "quadrature");
    for mu in [-0.5, 0.0, 0.5] {
        for x_r in [0.01, 0.125, 0.25, 0.5, 0.75, 0.9] {
            let reset = ResetSpec::fixed(1.0, x_r);
            let closed = q_case1(&g, mu, &reset, 1.0)?;
            let quad = q_case1_with(&g, mu, &reset, 1.0, &ForwardOptions::quadrature())?;
            println!("{mu:>6} {x_r:>6} {:>12.8} {:>12.8}", closed.value, quad.value);
            rows.push((mu, closed.value, quad.value));
        }
    }
    Ok(rows)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run().map(|_| ())
}
