// `!(a < b)` is used on purpose to reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod assembly;
pub mod banded;
pub mod dispersion;
pub mod eigen;
pub mod error;
pub mod quadrature;
pub mod real;
pub mod spline;

pub use error::{Error, Result};
