//! Passage and exit functionals for a single starting point and a fixed reset position.

pub mod bm;
pub mod bvp;
pub mod conjugate;
pub mod model;

pub use bm::{
    bm_coefficients, fpt_lt_bm, fpt_lt_bm_complex, mean_fet_bm, mean_fpt_bm, pi0_bm, pi0_classical,
    BmResetCoefficients,
};
pub use bvp::{bvp_solve, bvp_solve_with, BvpConfig, BvpTarget, GridFunction};
pub use conjugate::{conjugate_transform, pi0_conjugated, ConjugatedDensity, ConjugationMap};
pub use model::{Coefficient, DiffusionModel, Interval, ResetPosition, ResetSpec};
