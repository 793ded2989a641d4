//! Poroelastic flexural shells: midsurface geometry, strain operators, the
//! coupled bending / thickness-pressure solver, a cylindrical reduction, a
//! spectral pressure oracle and diagnostics.

// `!(x > 0.0)` is used deliberately so NaN fails validation; tensor code
// reads best with explicit indices.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::type_complexity)]

pub mod basis;
pub mod config;
pub mod cylinder;
pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod hermite;
pub mod loads;
pub mod material;
pub mod multiplier;
pub mod par;
pub mod quadrature;
pub mod run;
pub mod solver;
pub mod spectral;
pub mod strain;
pub mod tridiag;

pub use error::{Result, ShellError};
pub use par::Execution;
