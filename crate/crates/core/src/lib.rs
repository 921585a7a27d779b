//! Maximum-principle-preserving exponential multistep solvers for linear
//! parabolic and Allen-Cahn equations, discretized in space by lumped-mass
//! Gauss-Lobatto finite elements of arbitrary degree.
//!
//! The building blocks, bottom up:
//!
//! - [`gauss_lobatto`]: reference element, quadrature and nodal basis;
//! - [`grid_fem`]: grids, lumped mass and stiffness assembly, discrete norms;
//! - [`exp_action`]: actions of `exp(tL)` and phi-functions of `L = M^{-1}A`;
//! - [`potentials`]: Ginzburg-Landau and Flory-Huggins reaction terms;
//! - [`time_steppers`]: the k-step exponential integrator with nodal cut-off,
//!   Gauss-Legendre starting values and the stabilized ETD-RK2 baseline;
//! - [`experiments`]: convergence sweeps, cut-off comparison, 2D interface run;
//! - [`cli`]: the `mpp` command-line front end.

pub mod cli;
pub mod error;
pub mod exp_action;
pub mod experiments;
pub mod gauss_lobatto;
pub mod grid_fem;
pub mod potentials;
pub mod sparse;
pub mod time_steppers;

pub use error::{Error, Result};
