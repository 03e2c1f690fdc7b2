//! Spectral toolkit for passive-scalar mixing by divergence-free transport
//! noise on the torus.
//!
//! The crate is `no_std` with `alloc`. It holds every numerical kernel:
//!
//! - [`lattice`], [`theta`], [`frame`], [`constants`]: the truncated lattice
//!   `Z_0^d`, radially symmetric noise coefficients, orthonormal frames of
//!   `k^⊥` and the explicit mixing constants.
//! - [`spectrum`]: the closed linear system for `Y_k = E|û_k|²`, its
//!   integrator, norms, drifts, rate fits and theoretical bound curves.
//! - [`orbits`]: the discrete Poincaré inequality, the alternating-step
//!   orbit covers and the lattice Dirichlet-form comparison.
//! - [`mc`]: Euler–Maruyama Monte Carlo for the Fourier modes.
//! - [`euler`]: the α-regularized stochastic 2D Euler equation, generic over
//!   a 2D FFT backend.
//!
//! IO, configuration, parallel drivers and the CLI live in the companion
//! `mixing` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod constants;
pub mod error;
pub mod euler;
pub mod frame;
pub mod lattice;
pub mod mc;
pub mod orbits;
pub mod spectrum;
pub mod theta;

pub use error::{Error, Result};

/// `π`.
pub const PI: f64 = core::f64::consts::PI;
/// `4π²`, the symbol of `-Δ` on `e_k` per unit `|k|²`.
pub const FOUR_PI_SQ: f64 = 4.0 * PI * PI;
/// `8π²`, the second-moment decay per unit `κ|k|²`.
pub const EIGHT_PI_SQ: f64 = 8.0 * PI * PI;
