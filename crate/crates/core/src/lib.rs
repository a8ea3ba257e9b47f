//! Continuous Galerkin finite elements for the ideal MHD equations.
//!
//! The discretization uses Lagrange P1–P3 elements on structured simplicial
//! meshes in one and two space dimensions, classical RK4 in time with an
//! adaptive CFL step, and a residual-based artificial viscosity for shock
//! capturing. The magnetic divergence constraint can be controlled by an
//! elliptic projection, pseudo time-stepping, or hyperbolic (GLM) cleaning.
//!
//! Module map:
//!
//! - [`mesh`]: structured interval/triangle meshes and periodic pairing
//! - [`fe_space`]: Lagrange bases, quadrature, DOF numbering, mesh function
//! - [`physics`]: MHD state algebra, fluxes and wave speeds
//! - [`linalg`]: CSR storage, Jacobi-preconditioned conjugate gradients and banded Cholesky
//! - [`assembly`]: mass matrices and the Galerkin/viscous right-hand sides
//! - [`stabilization`]: the residual-based viscosity
//! - [`divclean`]: divergence cleaning
//! - [`integrator`]: RK4 time stepping, boundary conditions, the step loop
//! - [`bench`]: benchmark problems, error norms and output writers

pub mod assembly;
pub mod bench;
pub mod divclean;
pub mod error;
pub mod fe_space;
pub mod integrator;
pub mod linalg;
pub mod mesh;
pub mod physics;
pub mod stabilization;

pub use error::{Error, Result};
