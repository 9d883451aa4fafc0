//! Kernel-filtered regularization of the Cauchy problem for coupled elliptic
//! sine-Gordon equations on `(0, a) x (0, b)` with zero Neumann data in `y`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod exec;
pub mod experiments;
pub mod kernel;
pub mod model;
pub mod solver;
pub mod spectral_basis;

pub use error::{Error, Result};
