//! Crank-Nicolson fourth-order compact scheme for
//! `u_v + c u_z - c u_zz = 0`, with tools to locate the spectrum of its
//! amplification matrix and to bound the conditioning of each step.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod bounds;
pub mod error;
pub mod experiments;
pub mod problem;
pub mod scheme;
pub mod spectral;
pub mod stepper;
pub mod toeplitz;

pub use error::{Error, Result};
pub use problem::{canonicalize, CanonicalProblem, ExponentialOracle, Grid, PdeProblem};
pub use scheme::{coefficients, SchemeCoefficients};
