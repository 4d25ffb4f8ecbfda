//! Discrete Schrödinger operators on the lattice `hZ^d`, their embedding into
//! `L^2(R^d)` through a band-limited scaling function, and the estimators used
//! to measure how fast the lattice resolvents approach the continuum ones.
//!
//! The crate is organized in four layers:
//!
//! - [`scaling`]: the Meyer-type scaling function `φ`, its Fourier profile `φ̂`,
//!   the orthonormality checks and the coset-sum operator `Q_h` with its adjoint.
//! - [`symbols`]: Fourier symbols of the continuum and lattice Laplacians, and
//!   exact operator norms of fibered operators (sup over quasi-momenta of
//!   `3^d × 3^d` matrix norms).
//! - [`lattice`]: periodic-box realizations of `H_{0,h}`, `H_h`, the continuum
//!   reference `H`, the embedding `P_h`/`P_h^*`, and shifted linear solves.
//! - [`estimators`]: operator norm estimation, commutator bounds, spectral
//!   computations, Hausdorff distances and log-log rate fits.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod fourier;
pub mod lattice;
mod linalg;
pub mod scaling;
pub mod symbols;

pub use error::{Error, Result};
pub use fourier::C64;
