// Finding a start law that produces a given exit probability.

use reset_fpt::analytic::{Coefficient, DiffusionModel, ResetSpec};
use reset_fpt::forward::q_case1;
use reset_fpt::inverse::{ifpp_linear_closed_form, solve, Case, FreeParam, InverseKind, InverseProblem, SearchSpace, Status};
use reset_fpt::{DensityFamily, Result};

pub fn run() -> Result<Vec<Status>> {
    let (mu, r, x_r) = (0.3, 1.0, 0.4);
    let q = q_case1(&DensityFamily::beta(2.5, 1.5)?, mu, &ResetSpec::fixed(r, x_r), 1.0)?.value;

    let beta_search = InverseProblem {
        problem: InverseKind::Ifpp { q },
        case: Case::RandomInitial,
        model: DiffusionModel::brownian(mu),
        r,
        b: Some(1.0),
        x: None,
        x_r: Some(x_r),
        conjugated_scale: false,
        search: SearchSpace::family(DensityFamily::beta(1.0, 1.5)?, vec![FreeParam::new("alpha", 0.2, 10.0)]),
    };
    let sol = solve(&beta_search)?;
    println!("q = {q:.8}: {:?}, alpha = {:.8}, residual {:.1e}", sol.status, sol.parameters["alpha"], sol.residual);

    let lin = ifpp_linear_closed_form(q, mu, r, x_r)?;
    println!("linear density with the same q: a1 = {:.6}, a0 = {:.6}, valid {}", lin.a1, lin.a0, lin.valid_density);

    // drift r(x - x_R) makes pi0(x) = 1 - x, so symmetric laws all give q = 1/2
    let symmetric = InverseProblem {
        problem: InverseKind::Ifpp { q: 0.3 },
        model: DiffusionModel::custom(
            Coefficient::Affine {
                slope: r,
                intercept: -r * x_r,
            },
            Coefficient::Constant { value: 1.0 },
        )?,
        search: SearchSpace::family(
            DensityFamily::beta(2.0, 2.0)?,
            vec![FreeParam::new("alpha", 1.0, 20.0).tied_to("beta")],
        ),
        ..beta_search
    };
    let none = solve(&symmetric)?;
    if let Some(c) = &none.diagnostics.certificate {
        println!("{:?}: {}", none.status, c.message);
    }
    Ok(vec![sol.status, none.status])
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run().map(|_| ())
}
