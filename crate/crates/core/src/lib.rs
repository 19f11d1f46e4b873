//! Numerics for the Matsumoto–Yor process and its relatives.
//!
//! The crate is `no_std` (it needs `alloc`) and contains no IO. It covers:
//!
//! * [`specialfn`]: Gamma, the Macdonald function `K_λ` and its λ-derivatives,
//!   the Harish-Chandra c-function and the rank-one normalizer `a(q)`;
//! * [`series`]: Toda and Calogero–Moser–Sutherland eigenfunction series,
//!   rank-one spherical functions and the determinant formula for `SU(p,q)`;
//! * [`paths`]: Brownian paths, exponential functionals, the Pitman transform
//!   and the radial part of the distinguished hyperbolic Brownian motion;
//! * [`matrixproc`]: triangular-group Brownian motion and the solvable
//!   horocyclic model of `SU(p,q)` / `SO(p,q)`;
//! * [`trees`]: exact rational Markov kernels on homogeneous trees;
//! * [`stats`]: the statistical tests used to check the stochastic limits.
#![no_std]
#![warn(missing_debug_implementations)]
// Float methods come from num-traits (libm) in the no_std build; the test
// build links std, whose inherent methods shadow them.
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod linalg;
pub mod matrixproc;
pub mod paths;
pub mod rng;
pub mod series;
pub mod specialfn;
pub mod stats;
pub mod trees;

pub use error::{Error, Result};
pub use rng::RngStream;
