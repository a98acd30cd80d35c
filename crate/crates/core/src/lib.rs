// Negated comparisons are how NaN inputs get rejected along with out-of-range ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

//! Compressible Navier–Stokes–Fourier flow in a heated periodic strip and its
//! Oberbeck–Boussinesq limit with a non-local temperature boundary condition.

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod nsf;
pub mod ob;
pub mod thermo;
pub mod timing;

pub use error::{BllError, Result};
