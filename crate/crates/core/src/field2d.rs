//! Tensor-product spectral fields on `[-1, 1]^2`.
//!
//! A [`Field2D`] stores coefficients `c_{jk}` with respect to
//! `phi_j(x) phi_k(y)`; row index is the x-mode. Nodal values live on the
//! `2M x 2M` tensor Gauss grid, where nonlinear terms are evaluated before
//! being projected back, so cubic nonlinearities of fields in the space are
//! integrated without aliasing.

use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::quad_legendre::Basis1D;

/// Absolute tolerance for the zero-mean precondition of the inverse
/// Laplacian and the H^-1 norm.
pub const ZERO_MEAN_TOL: f64 = 1e-10;

/// Spectral coefficients of a scalar field.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    coeffs: DMatrix<f64>,
}

/// Values at the `2M x 2M` tensor Gauss nodes; entry `(i, j)` is at
/// `(x_i, y_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalGrid2D {
    pub values: DMatrix<f64>,
}

impl Field2D {
    pub fn zeros(basis: &Basis1D) -> Self {
        let m = basis.dim();
        Self {
            coeffs: DMatrix::zeros(m, m),
        }
    }

    /// The constant field `value`.
    pub fn constant(basis: &Basis1D, value: f64) -> Self {
        let mut f = Self::zeros(basis);
        f.coeffs[(0, 0)] = value;
        f
    }

    pub fn from_coeffs(coeffs: DMatrix<f64>) -> Result<Self> {
        if coeffs.nrows() != coeffs.ncols() {
            return Err(Error::DimensionMismatch {
                expected: coeffs.nrows(),
                found: coeffs.ncols(),
            });
        }
        Ok(Self { coeffs })
    }

    /// Basis dimension this field is expressed in.
    pub fn dim(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut DMatrix<f64> {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> DMatrix<f64> {
        self.coeffs
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|v| v.is_finite())
    }

    pub(crate) fn check_basis(&self, basis: &Basis1D) -> Result<()> {
        if self.dim() != basis.dim() {
            return Err(Error::BasisMismatch {
                expected: basis.dim(),
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl Add for &Field2D {
    type Output = Field2D;
    fn add(self, rhs: &Field2D) -> Field2D {
        Field2D {
            coeffs: &self.coeffs + &rhs.coeffs,
        }
    }
}

impl Sub for &Field2D {
    type Output = Field2D;
    fn sub(self, rhs: &Field2D) -> Field2D {
        Field2D {
            coeffs: &self.coeffs - &rhs.coeffs,
        }
    }
}

impl Mul<f64> for &Field2D {
    type Output = Field2D;
    fn mul(self, rhs: f64) -> Field2D {
        Field2D {
            coeffs: &self.coeffs * rhs,
        }
    }
}

impl NodalGrid2D {
    /// Applies `f` pointwise.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self {
            values: self.values.map(f),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Tensor Gauss quadrature of the grid values over the square.
    pub fn integrate(&self, basis: &Basis1D) -> f64 {
        let w = &basis.quad().weights;
        let mut total = 0.0;
        for (j, column) in self.values.column_iter().enumerate() {
            let col: f64 = w.iter().zip(column.iter()).map(|(wi, v)| wi * v).sum();
            total += w[j] * col;
        }
        total
    }
}

/// Evaluates a field on the dealiasing grid: `Phi C Phi^T`.
pub fn synthesize(f: &Field2D, basis: &Basis1D) -> Result<NodalGrid2D> {
    f.check_basis(basis)?;
    let phi = basis.phi_table();
    Ok(NodalGrid2D {
        values: phi * f.coeffs() * phi.transpose(),
    })
}

/// Galerkin load `b_{jk} = sum_{i,l} w_i w_l g(x_i, y_l) phi_j(x_i) phi_k(y_l)`.
pub fn galerkin_load(g: &NodalGrid2D, basis: &Basis1D) -> Result<DMatrix<f64>> {
    let n = 2 * basis.dim();
    if g.values.nrows() != n || g.values.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.values.nrows(),
        });
    }
    if !g.is_finite() {
        return Err(Error::NonFinite("nodal grid"));
    }
    let wphi = basis.weighted_phi_table();
    Ok(wphi.transpose() * &g.values * wphi)
}

/// Coefficients whose Galerkin load equals `load` (two mass solves).
pub fn analyze(load: &DMatrix<f64>, basis: &Basis1D) -> Result<Field2D> {
    let m = basis.dim();
    if load.nrows() != m || load.ncols() != m {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: load.nrows(),
        });
    }
    let half = basis.mass_solve(load)?;
    let coeffs = basis.mass_solve(&half.transpose())?.transpose();
    Ok(Field2D { coeffs })
}

/// L2 projection of nodal data onto the Galerkin space.
///
/// Equal to `analyze(galerkin_load(g))`, but computed through discrete
/// Legendre coefficients, which avoids the conditioning of the mass matrix.
pub fn project(g: &NodalGrid2D, basis: &Basis1D) -> Result<Field2D> {
    let n = 2 * basis.dim();
    if g.values.nrows() != n || g.values.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: g.values.nrows(),
        });
    }
    if !g.is_finite() {
        return Err(Error::NonFinite("nodal grid"));
    }
    let wl = basis.weighted_legendre_table();
    let mut leg = wl.transpose() * &g.values * wl;
    let m = basis.dim();
    for j in 0..m {
        for i in 0..m {
            leg[(i, j)] *= (2 * i + 1) as f64 * (2 * j + 1) as f64 / 4.0;
        }
    }
    let half = basis.legendre_to_basis(&leg)?;
    let coeffs = basis.legendre_to_basis(&half.transpose())?.transpose();
    Ok(Field2D { coeffs })
}

/// `(u, v)` over the square.
pub fn inner(u: &Field2D, v: &Field2D, basis: &Basis1D) -> f64 {
    let mass = basis.mass();
    let mv = mass * v.coeffs() * mass;
    u.coeffs().dot(&mv)
}

pub fn l2_norm(f: &Field2D, basis: &Basis1D) -> f64 {
    inner(f, f, basis).max(0.0).sqrt()
}

/// `|f|_1 = ||grad f||`.
pub fn h1_seminorm(f: &Field2D, basis: &Basis1D) -> f64 {
    gradient_inner(f, f, basis).max(0.0).sqrt()
}

/// `(grad u, grad v)` over the square.
pub fn gradient_inner(u: &Field2D, v: &Field2D, basis: &Basis1D) -> f64 {
    let (mass, stiff) = (basis.mass(), basis.stiff());
    let c = v.coeffs();
    let kv = stiff * c * mass + mass * c * stiff;
    u.coeffs().dot(&kv)
}

/// Spatial average over the square (area 4).
pub fn mean(f: &Field2D, basis: &Basis1D) -> f64 {
    let mass = basis.mass();
    let row = mass.row(0);
    let integral = (row * f.coeffs() * row.transpose())[(0, 0)];
    0.25 * integral
}

/// Coefficients in the tensor eigenbasis: `Z^-1 C Z^-T`.
pub(crate) fn to_eigen(c: &DMatrix<f64>, basis: &Basis1D) -> DMatrix<f64> {
    let zi = basis.eig_vecs_t_mass();
    zi * c * zi.transpose()
}

/// Galerkin load expressed in the tensor eigenbasis: `Z^T B Z`.
pub(crate) fn load_to_eigen(b: &DMatrix<f64>, basis: &Basis1D) -> DMatrix<f64> {
    let z = basis.eig_vecs();
    z.transpose() * b * z
}

pub(crate) fn from_eigen(hat: &DMatrix<f64>, basis: &Basis1D) -> DMatrix<f64> {
    let z = basis.eig_vecs();
    z * hat * z.transpose()
}

fn require_zero_mean(v: &Field2D, basis: &Basis1D) -> Result<()> {
    let m = mean(v, basis);
    if m.is_nan() || m.abs() > ZERO_MEAN_TOL {
        return Err(Error::NonZeroMean { mean: m });
    }
    Ok(())
}

/// Solves `(grad v1, grad w) = (v, w)` for all `w` with `mean(v1) = 0`.
///
/// Diagonal in the tensor eigenbasis with symbol `lambda_i + lambda_j`;
/// the constant mode of the result is fixed to zero.
pub fn neumann_inv_laplacian(v: &Field2D, basis: &Basis1D) -> Result<Field2D> {
    v.check_basis(basis)?;
    require_zero_mean(v, basis)?;
    let lam = basis.eig_vals();
    let mut hat = to_eigen(v.coeffs(), basis);
    let m = basis.dim();
    for j in 0..m {
        for i in 0..m {
            hat[(i, j)] = if i == 0 && j == 0 {
                0.0
            } else {
                hat[(i, j)] / (lam[i] + lam[j])
            };
        }
    }
    Ok(Field2D {
        coeffs: from_eigen(&hat, basis),
    })
}

/// `||v||_{-1} = sqrt((v, (-Delta)^-1 v))` for zero-mean `v`.
pub fn h_minus1_norm(v: &Field2D, basis: &Basis1D) -> Result<f64> {
    let v1 = neumann_inv_laplacian(v, basis)?;
    Ok(inner(v, &v1, basis).max(0.0).sqrt())
}
