//! Pseudo-spectral toolkit for semilinear nonlocal diffusion on a half-space.
//!
//! The equation is `d/dt u = J * u - u + |u|^alpha u` on the half-space
//! `x_N > 0` with Dirichlet data on the boundary, absorbed by odd reflection
//! into a periodic box `[-L, L)^N`. The crate provides the scaled transforms,
//! the lattice fields with their symmetry certificates, the diffusion symbol
//! families, semigroup kernels, the linear and semilinear evolutions, and the
//! verification harness that checks the quantitative estimates the solver is
//! built on (decay exponents, first-moment conservation, boundary-probe
//! lower bounds, blow-up detection).

pub mod config;
pub mod error;
pub mod experiments;
pub mod fft;
pub mod fields;
pub mod kernels;
pub mod linear;
pub mod quad;
pub mod semilinear;
pub mod symbols;

pub use error::{Error, Result};
