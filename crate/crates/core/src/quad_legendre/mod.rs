//! One-dimensional Legendre machinery: polynomial evaluation, Gauss
//! quadrature and the Galerkin basis with its generalized eigendecomposition.

mod basis;
mod quadrature;

pub use basis::{build_basis, generalized_eig, Basis1D};
pub use quadrature::{gauss_rule, legendre_eval, QuadratureRule};
