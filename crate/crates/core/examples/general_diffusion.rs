// Exit problems for diffusions without closed forms: the finite-difference
// solver, and the Feller process through its conjugation to Brownian motion.

use reset_fpt::analytic::{
    bvp_solve, pi0_conjugated, BvpTarget, Coefficient, ConjugationMap, DiffusionModel, Interval, ResetSpec,
};
use reset_fpt::Result;

pub fn run() -> Result<Vec<f64>> {
    let reset = ResetSpec::fixed(1.0, 0.4);
    let iv = Interval::unit(1.0)?;
    let ou = DiffusionModel::OrnsteinUhlenbeck { nu: 1.5, sigma: 0.8 };
    let t = BvpTarget::ExitProbability;
    let pi0 = bvp_solve(&ou, &iv, &reset, t, t.default_boundary())?;
    let t = BvpTarget::MeanExitTime;
    let fet = bvp_solve(&ou, &iv, &reset, t, t.default_boundary())?;
    println!("Ornstein-Uhlenbeck, {} intervals", pi0.intervals());
    println!("{:>5} {:>10} {:>10}", "x", "pi0", "E[tau]");
    for x in [0.1, 0.3, 0.5, 0.7, 0.9] {
        println!("{x:>5} {:>10.6} {:>10.6}", pi0.eval(x)?, fet.eval(x)?);
    }

    // sigma(x) = 1 + x/2 with the drift that keeps pi0 linear
    let custom = DiffusionModel::custom(
        Coefficient::Affine {
            slope: 1.0,
            intercept: -0.4,
        },
        Coefficient::Affine {
            slope: 0.5,
            intercept: 1.0,
        },
    )?;
    let t = BvpTarget::ExitProbability;
    let lin = bvp_solve(&custom, &iv, &reset, t, t.default_boundary())?;
    println!("drift x - 0.4: pi0(0.25) = {:.8} (1 - x = 0.75)", lin.eval(0.25)?);

    // sigma vanishes at 0, so the grid solver refuses and the conjugation to BM is used
    let feller = pi0_conjugated(0.3, ConjugationMap::Feller, &ResetSpec::fixed(1.0, 0.5), 1.0)?;
    let refused = bvp_solve(
        &DiffusionModel::Feller,
        &iv,
        &ResetSpec::fixed(1.0, 0.5),
        t,
        t.default_boundary(),
    );
    match &refused {
        Err(e) => println!("Feller pi0(0.3) = {feller:.8}; finite differences: {e}"),
        Ok(_) => println!("Feller pi0(0.3) = {feller:.8}"),
    }
    Ok(vec![lin.eval(0.25)?, feller, f64::from(u8::from(refused.is_err()))])
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run().map(|_| ())
}
