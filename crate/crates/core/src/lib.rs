//! Numerical core for the stochastic phytoplankton aggregation model
//!
//! ```text
//! ∂u/∂t = D ∂²u/∂x² − ∂/∂x ( u · (G ∗ u⁰) ) + √(λ u₊) Ẇ      on (0, L), Neumann walls
//! ```
//!
//! The crate is `no_std` (it only needs `alloc`) and contains no IO. It provides
//!
//! - [`grid`]: the cell-centred grid and sampled densities ([`Field`]),
//! - [`kernel`]: the attraction kernel `G` and its zero-extended convolution,
//! - [`model`]: model parameters and the chemotactic drift,
//! - [`semigroup`]: the Neumann cosine eigenbasis, the heat semigroup and the
//!   `D(B)` graph norm, together with the smoothing and Hölder-integral checks,
//! - [`noise`]: reproducible space-time white noise and the Lipschitz
//!   approximations `aₙ` of the branching coefficient,
//! - [`solver`]: exponential Euler time stepping and the Picard iteration,
//! - [`diagnostics`]: empirical constants, tightness functionals, quadratic
//!   variation and convergence studies.
//!
//! Transcendental functions come from `libm` so results are identical on every
//! target, with or without `std`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod model;
pub mod noise;
pub mod semigroup;
pub mod solver;
pub mod stats;

pub use error::{Error, Result};
pub use grid::{Field, SpatialGrid};
pub use kernel::KernelSpec;
pub use model::ModelParams;
pub use noise::{ApproxCoefficient, NoiseIncrement, NoisePath, NoiseSpec, NoiseStream};
pub use semigroup::{EigenBasis, SpectralCoeffs};
pub use solver::{SolverConfig, SolverMode, Trajectory};
