//! Convex Difference Neural Networks.
//!
//! A CDiNN represents a scalar function as the difference of two polyhedral
//! convex networks, `f = f1 - f2`. Minimizing such a network over a polytope
//! is done with the convex-concave procedure, and every iteration of that
//! procedure is a linear program solved by the in-crate simplex solver.
//!
//! Module map:
//! - [`nn`]: matrices, layers, activations, reverse-mode gradients, Adam.
//! - [`arch`]: the six network kinds, the DC split and exact constructions.
//! - [`lp`]: dense two-phase simplex.
//! - [`dcopt`]: epigraph LPs, CCP and the filtered-beta subgradient baseline.
//! - [`bench`]: test functions, datasets, scaling, training and experiments.

pub mod arch;
pub mod bench;
pub mod dcopt;
mod error;
pub mod lp;
pub mod nn;

pub use error::{Error, Result};
