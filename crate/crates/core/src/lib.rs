#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod fcurve;
pub mod fundamental;
pub mod green;
pub mod minimizer;
pub mod oracle;
pub mod ode;
pub mod potential;
pub mod quadrature;
pub mod spline;
pub mod tridiagonal;

pub use error::{Error, Result};
pub use potential::{ExamplePotentialParams, Potential, PotentialSpec};
