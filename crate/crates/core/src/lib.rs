//! Spreading speeds of KPP reaction-diffusion fronts in a field coupled to a
//! line of fast diffusion ("road") through nonlocal exchange kernels.
//!
//! The crate computes the speed `c*` from the dispersion relation of linear
//! traveling waves, studies its behaviour under long-range rescaling of the
//! exchange kernels, and cross-checks the result by integrating the full
//! system directly.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod bvp;
pub mod cli;
pub mod dispersion;
pub mod error;
pub mod model;
pub mod pdesim;
pub mod speed;
mod tridiag;
pub mod validate;

pub use error::{Error, Result};
pub use model::{ExchangeSpec, GridFunction, KernelShape, ModelParams};
pub use speed::{GridConfig, SpeedProblem, SpeedRegime, SpeedResult};
