#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod analytic;
pub mod cli;
pub mod densities;
pub mod error;
pub mod forward;
pub mod inverse;
pub mod quadrature;
pub mod simulate;
pub(crate) mod special;

pub use densities::{DensityFamily, FamilyKind};
pub use error::{Error, Result};
