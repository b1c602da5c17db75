//! Stabilized linear Crank-Nicolson integration of the Cahn-Hilliard
//! equation on `[-1, 1]^2` with a Legendre-Galerkin spectral discretization.
//!
//! The crate is organized bottom-up:
//!
//! * [`quad_legendre`]: Legendre polynomials, Gauss rules and the 1D basis
//!   with its generalized eigendecomposition.
//! * [`field2d`]: tensor-product fields, transforms, norms and the Neumann
//!   inverse Laplacian.
//! * [`potential`]: the truncated double-well potential.
//! * [`stepper`]: the time integrator and the energy functionals.
//! * [`diagnostics`]: error norms, convergence orders and energy traces.
//! * [`experiments`]: initial data, convergence studies, stability sweeps,
//!   energy traces and snapshot I/O.

pub mod diagnostics;
pub mod error;
pub mod experiments;
pub mod field2d;
pub mod potential;
pub mod quad_legendre;
pub mod stepper;

pub use error::{Error, Result};
pub use field2d::Field2D;
pub use quad_legendre::Basis1D;
pub use stepper::{SchemeParams, StepOperator, StepperState};
