// Choosing a reset-position law for a target mean passage or exit time.

use reset_fpt::analytic::DiffusionModel;
use reset_fpt::forward::{mean_fet_case2, mean_fpt_case2};
use reset_fpt::inverse::{solve, Case, FreeParam, InverseKind, InverseProblem, SearchSpace};
use reset_fpt::{DensityFamily, Error, Result};

pub fn run() -> Result<Vec<f64>> {
    let (r, x) = (0.5, 0.6);
    let m = mean_fpt_case2(&DensityFamily::gamma(2.0, 2.5)?, x, 0.0, r)?.value;
    let mut p = InverseProblem {
        problem: InverseKind::Imfpt { m },
        case: Case::RandomReset,
        model: DiffusionModel::brownian(0.0),
        r,
        b: None,
        x: Some(x),
        x_r: None,
        conjugated_scale: false,
        search: SearchSpace::family(DensityFamily::gamma(2.0, 10.0)?, vec![FreeParam::new("rate", 1.05, 50.0)]),
    };
    let rate = solve(&p)?.parameters["rate"];
    println!("mean passage time {m:.6} <- Gamma(2, {rate:.8}) reset position");

    p.problem = InverseKind::Imfpt { m: 1000.0 };
    match solve(&p) {
        Err(Error::Range { lo, hi, .. }) => println!("m = 1000 is out of reach: attainable [{lo:.4}, {hi:.4}]"),
        other => println!("unexpected: {other:?}"),
    }

    let b = 1.0;
    let m = mean_fet_case2(&DensityFamily::truncated_exponential(1.2, b)?, 0.4, 0.0, 1.0, b)?.value;
    let exit = InverseProblem {
        problem: InverseKind::Imfet { m },
        r: 1.0,
        b: Some(b),
        x: Some(0.4),
        search: SearchSpace::family(
            DensityFamily::truncated_exponential(0.5, b)?,
            vec![FreeParam::new("theta", -5.0, 5.0)],
        ),
        ..p
    };
    let theta = solve(&exit)?.parameters["theta"];
    println!("mean exit time {m:.6} <- truncated exponential reset, theta {theta:.8}");
    Ok(vec![rate, theta])
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run().map(|_| ())
}
