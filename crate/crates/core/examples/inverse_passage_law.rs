// Recovering a start law from the passage-time distribution, three ways:
// transform samples, raw moments, and the explicit inversion of ĝ.

use reset_fpt::analytic::ResetSpec;
use reset_fpt::forward::fpt_lt_case1;
use reset_fpt::inverse::{
    default_lambda_grid, ifpt_ghat_from_fhat, solve, Case, FptLawSpec, FreeParam, InverseKind, InverseProblem,
    PassageTransform, SearchSpace,
};
use reset_fpt::{DensityFamily, Result};

pub fn run() -> Result<Vec<f64>> {
    let (mu, r, x_r) = (0.0, 1.0, 0.8);
    let truth = DensityFamily::gamma(2.0, 1.5)?;
    let reset = ResetSpec::fixed(r, x_r);

    let lambda = default_lambda_grid();
    let values = lambda
        .iter()
        .map(|&l| fpt_lt_case1(l, &truth, mu, &reset).map(|v| v.value))
        .collect::<Result<Vec<_>>>()?;
    let problem = InverseProblem {
        problem: InverseKind::Ifpt {
            target: FptLawSpec::Transform { lambda, values },
        },
        case: Case::RandomInitial,
        model: reset_fpt::analytic::DiffusionModel::brownian(mu),
        r,
        b: None,
        x: None,
        x_r: Some(x_r),
        conjugated_scale: false,
        search: SearchSpace::family(
            DensityFamily::gamma(1.0, 1.0)?,
            vec![FreeParam::new("shape", 0.2, 10.0), FreeParam::new("rate", 0.05, 20.0)],
        ),
    };
    let sol = solve(&problem)?;
    println!(
        "from transform samples: shape {:.8}, rate {:.8} ({:?}, unique {})",
        sol.parameters["shape"], sol.parameters["rate"], sol.status, sol.diagnostics.unique
    );

    let fhat = PassageTransform::random_initial(truth.clone(), mu, r, x_r);
    println!("{:>8} {:>14} {:>14}", "theta", "from f-hat", "g-hat");
    for theta in [1.5, 2.0, 4.0, 8.0] {
        let g = ifpt_ghat_from_fhat(theta, &fhat, mu, r, x_r)?;
        println!("{theta:>8} {g:>14.10} {:>14.10}", truth.laplace(theta)?);
    }
    Ok(vec![sol.parameters["shape"], sol.parameters["rate"]])
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run().map(|_| ())
}
