//! Solvers for least-squares regression penalized by the latent
//! (overlapping) group lasso norm.
//!
//! The crate is organized around the identity `prox = Id - projection`:
//! the proximity operator of the penalty is computed by projecting onto an
//! intersection of group cylinders, restricted to the active groups. Two
//! projection backends are provided (cyclic projections for any supported
//! exponent, a dual projected-Newton method for `p = 2`), and the outer
//! loop is an inexact ISTA/FISTA scheme with a decaying inner tolerance.
//!
//! The crate is `no_std` (with `alloc`); all IO lives in the companion
//! CLI crate.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod cyclic;
pub mod dual_newton;
pub mod error;
pub mod group;
pub mod matrix;
pub mod prox;
pub mod solver;

mod math;

pub use error::Error;
pub use group::{ActiveSet, ExponentPair, GroupStructure};
pub use matrix::DenseMatrix;
pub use prox::{Backend, ProxResult};
pub use solver::{
    tau_grid, tau_max, Algorithm, Problem, SolveDiagnostics, SolverConfig,
};

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
