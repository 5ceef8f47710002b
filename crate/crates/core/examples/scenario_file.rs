// Building a scenario in code, writing it as JSON, and running it the way
// `reset-fpt forward --scenario <file>` would.

use reset_fpt::analytic::{DiffusionModel, Interval, ResetPosition, ResetSpec};
use reset_fpt::cli::{Request, Scenario};
use reset_fpt::forward::{ForwardRequest, ForwardTarget};
use reset_fpt::{DensityFamily, Result};

pub fn run() -> Result<f64> {
    let scenario = Scenario {
        schema_version: 1,
        name: "mean exit time, Beta start".into(),
        request: Request::Forward(ForwardRequest {
            model: DiffusionModel::brownian(-0.3),
            interval: Some(Interval::unit(2.0)?),
            start: ResetPosition::Random(DensityFamily::scaled_beta(2.0, 2.0, 2.0)?),
            reset: ResetSpec::fixed(0.7, 1.2),
            target: ForwardTarget::MeanFet,
        }),
        output: None,
    };
    let text = scenario.to_json();
    println!("{text}");
    let back = Scenario::parse(&text)?;
    let Request::Forward(req) = &back.request else {
        unreachable!()
    };
    let v = req.evaluate()?[0].value;
    println!("mean exit time {v:.8}");
    Ok(v)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run().map(|_| ())
}
