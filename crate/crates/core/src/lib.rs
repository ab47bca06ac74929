//! Simulation and parameter estimation for a strongly damped stochastic wave
//! equation written in its spectral (mode-by-mode) form.

// Negated comparisons such as `!(x > 0.0)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops over parallel per-mode arrays read better than zipped iterators.
#![allow(clippy::needless_range_loop)]

pub mod asymptotics;
pub mod cli;
pub mod error;
pub mod estimators;
pub mod functionals;
pub mod linalg;
pub mod model;
pub mod output;
pub mod rng;
pub mod simulator;
pub mod stats;
pub mod summation;

pub use error::{Error, Result};
