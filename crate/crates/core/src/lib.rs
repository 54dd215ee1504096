//! Numerical laboratory for a nonlinear diatomic lattice with on-site
//! potentials: dispersion and resonance structure, macroscopic envelope
//! equations, two-scale approximations and validation experiments that
//! measure their error scaling against direct lattice simulation.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod amplitude;
pub mod ansatz;
pub mod error;
pub mod fit;
pub mod fourier;
pub mod harness;
pub mod microsim;
pub mod model;
pub mod resonance;
pub mod spectrum;

pub use error::{Error, Result};
pub use num_complex::Complex64;
