// Mean passage and exit times when either the start or the reset position is random.

use reset_fpt::analytic::ResetSpec;
use reset_fpt::forward::{mean_fet_case1, mean_fet_case2, mean_fpt_case1, mean_fpt_case2};
use reset_fpt::{DensityFamily, Result};

pub fn run() -> Result<[f64; 4]> {
    let (mu, r) = (0.2, 1.0);
    let start = DensityFamily::gamma(2.0, 1.5)?;
    let reset = ResetSpec::fixed(r, 0.8);
    let a = mean_fpt_case1(&start, mu, &reset)?.value;
    println!("E[tau], Gamma(2, 1.5) start, reset to 0.8:      {a:.6}");

    let h = DensityFamily::uniform(0.0, 0.8)?;
    let b = mean_fpt_case2(&h, 0.8, mu, r)?.value;
    println!("E[tau], start 0.8, reset uniform on (0, 0.8):   {b:.6}");

    let g = DensityFamily::beta(2.0, 3.0)?;
    let c = mean_fet_case1(&g, mu, &ResetSpec::fixed(r, 0.5), 1.0)?.value;
    println!("E[tau_0,1], Beta(2, 3) start, reset to 0.5:     {c:.6}");

    let d = mean_fet_case2(&DensityFamily::uniform(0.0, 1.0)?, 0.4, 0.0, r, 1.0)?.value;
    println!("E[tau_0,1], start 0.4, reset uniform on (0, 1): {d:.6}");
    Ok([a, b, c, d])
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run().map(|_| ())
}
