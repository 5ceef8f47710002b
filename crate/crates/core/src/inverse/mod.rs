//! Inverse first-passage problems and Laplace-domain tools.

pub mod optimize;
pub mod problem;
pub mod transform;

pub use optimize::{Bounds, MinimizeConfig};
pub use problem::{
    default_lambda_grid, ifpp_linear_closed_form, solve, solve_ifpp, solve_ifpt, solve_imfet, solve_imfpt, solve_with,
    Case, Certificate, Diagnostics, FamilySearch, FptLawSpec, FreeParam, InverseKind, InverseProblem, InverseSolution,
    LinearSolution, Objective, Replay, SearchSpace, Status,
};
pub use transform::{
    ifpt_ghat_from_fhat, laplace_invert, laplace_invert_with, moments_from_lt, Inversion, InversionConfig,
    LaplaceTransform, Moments, PassageTransform,
};
