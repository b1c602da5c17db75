use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};

use super::quadrature::{gauss_rule, legendre_all, QuadratureRule};
use crate::error::{Error, Result};

const EIG_TOL: f64 = 1e-15;
const EIG_MAX_ITER: usize = 10_000;

/// One-dimensional Legendre-Galerkin basis on [-1, 1].
///
/// The modes are `L_0`, `L_1` and `L_{k-2} - L_k` for `k = 2..M-1`, which
/// together span the polynomials of degree at most `M - 1`. The modes with
/// `k >= 2` vanish at both endpoints. The natural (Neumann) boundary
/// condition is not built into the basis; it is enforced weakly by the
/// Galerkin formulation.
///
/// Tabulation uses the `2M`-point Gauss rule so that products of up to
/// four basis functions are integrated without aliasing.
#[derive(Debug, Clone)]
pub struct Basis1D {
    m: usize,
    quad: QuadratureRule,
    phi: DMatrix<f64>,
    dphi: DMatrix<f64>,
    weighted_phi: DMatrix<f64>,
    weighted_legendre: DMatrix<f64>,
    mass: DMatrix<f64>,
    stiff: DMatrix<f64>,
    mass_chol: Cholesky<f64, Dyn>,
    eig_vals: DVector<f64>,
    eig_vecs: DMatrix<f64>,
    eig_vecs_t_mass: DMatrix<f64>,
}

/// Value and derivative of basis mode `k` at `x`, from precomputed
/// Legendre values `L_0..L_k`.
fn mode_from_legendre(k: usize, vals: &[f64], ders: &[f64]) -> (f64, f64) {
    match k {
        0 | 1 => (vals[k], ders[k]),
        _ => (vals[k - 2] - vals[k], ders[k - 2] - ders[k]),
    }
}

impl Basis1D {
    /// Builds the basis of dimension `m` (`m >= 3`).
    pub fn new(m: usize) -> Result<Self> {
        if m < 3 {
            return Err(Error::InvalidArgument(format!(
                "basis dimension must be at least 3, got {m}"
            )));
        }
        let quad = gauss_rule(2 * m)?;
        let nq = quad.len();
        let mut phi = DMatrix::zeros(nq, m);
        let mut dphi = DMatrix::zeros(nq, m);
        let mut weighted_legendre = DMatrix::zeros(nq, m);
        for (i, &x) in quad.nodes.iter().enumerate() {
            let (vals, ders) = legendre_all(m, x);
            for k in 0..m {
                weighted_legendre[(i, k)] = quad.weights[i] * vals[k];
                let (v, d) = mode_from_legendre(k, &vals, &ders);
                phi[(i, k)] = v;
                dphi[(i, k)] = d;
            }
        }
        let w = DMatrix::from_diagonal(&DVector::from_column_slice(&quad.weights));
        let weighted_phi = &w * &phi;
        let weighted_dphi = &w * &dphi;
        // Degree of the integrands is at most 2M - 2 <= 4M - 1: exact.
        let mut mass = phi.transpose() * &weighted_phi;
        let mut stiff = dphi.transpose() * &weighted_dphi;
        symmetrize(&mut mass);
        symmetrize(&mut stiff);

        let (mut eig_vals, mut eig_vecs) = generalized_eig(&mass, &stiff)?;
        pin_constant_mode(&mass, &mut eig_vals, &mut eig_vecs)?;

        let mass_chol = Cholesky::new(mass.clone()).ok_or(Error::NotPositiveDefinite)?;
        let eig_vecs_t_mass = eig_vecs.transpose() * &mass;
        Ok(Self {
            m,
            quad,
            phi,
            dphi,
            weighted_phi,
            weighted_legendre,
            mass,
            stiff,
            mass_chol,
            eig_vals,
            eig_vecs,
            eig_vecs_t_mass,
        })
    }

    /// Basis dimension `M`.
    pub fn dim(&self) -> usize {
        self.m
    }

    /// The `2M`-point dealiasing rule.
    pub fn quad(&self) -> &QuadratureRule {
        &self.quad
    }

    /// `phi_k(x_i)`, shape `2M x M`.
    pub fn phi_table(&self) -> &DMatrix<f64> {
        &self.phi
    }

    /// `phi_k'(x_i)`, shape `2M x M`.
    pub fn dphi_table(&self) -> &DMatrix<f64> {
        &self.dphi
    }

    /// `w_i phi_k(x_i)`, shape `2M x M`.
    pub fn weighted_phi_table(&self) -> &DMatrix<f64> {
        &self.weighted_phi
    }

    /// `w_i L_k(x_i)`, shape `2M x M`.
    pub fn weighted_legendre_table(&self) -> &DMatrix<f64> {
        &self.weighted_legendre
    }

    pub fn mass(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn stiff(&self) -> &DMatrix<f64> {
        &self.stiff
    }

    pub fn mass_cholesky(&self) -> &Cholesky<f64, Dyn> {
        &self.mass_chol
    }

    /// Generalized eigenvalues of `(stiff, mass)`, ascending; the first is
    /// exactly zero.
    pub fn eig_vals(&self) -> &DVector<f64> {
        &self.eig_vals
    }

    /// Mass-orthonormal eigenvectors `Z`, one per column.
    pub fn eig_vecs(&self) -> &DMatrix<f64> {
        &self.eig_vecs
    }

    /// `Z^T mass`, the inverse of `Z`.
    pub fn eig_vecs_t_mass(&self) -> &DMatrix<f64> {
        &self.eig_vecs_t_mass
    }

    /// Solves `mass x = b` for every column of `b`.
    ///
    /// Uses the factorization `mass = T^T D T`, where `T` maps basis
    /// coefficients to Legendre coefficients and `D = diag(2 / (2k + 1))`.
    /// Both triangular solves are short recursions, so the error grows like
    /// `M` rather than with the condition number of `mass`.
    pub fn mass_solve(&self, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let m = self.m;
        if rhs.nrows() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: rhs.nrows(),
            });
        }
        let mut out = rhs.clone();
        let mut leg = vec![0.0; m];
        for mut col in out.column_iter_mut() {
            // loads against L_k: b_k = (g, L_{k-2}) - (g, L_k)
            leg[0] = col[0];
            leg[1] = col[1];
            for k in 2..m {
                leg[k] = leg[k - 2] - col[k];
            }
            for (k, v) in leg.iter_mut().enumerate() {
                *v *= (2 * k + 1) as f64 / 2.0;
            }
            col.copy_from_slice(&leg);
            legendre_to_basis_inplace(col.as_mut_slice());
        }
        Ok(out)
    }

    /// Converts Legendre coefficients (one set per column) to basis
    /// coefficients.
    pub fn legendre_to_basis(&self, leg: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if leg.nrows() != self.m {
            return Err(Error::DimensionMismatch {
                expected: self.m,
                found: leg.nrows(),
            });
        }
        let mut out = leg.clone();
        for mut col in out.column_iter_mut() {
            legendre_to_basis_inplace(col.as_mut_slice());
        }
        Ok(out)
    }

    /// Value and derivative of mode `k` at an arbitrary point of [-1, 1].
    pub fn eval_mode(&self, k: usize, x: f64) -> Result<(f64, f64)> {
        if k >= self.m {
            return Err(Error::InvalidArgument(format!("mode {k} out of range")));
        }
        if x.is_nan() || x.abs() > 1.0 + 1e-12 {
            return Err(Error::Domain { x });
        }
        let (vals, ders) = legendre_all(k + 1, x);
        Ok(mode_from_legendre(k, &vals, &ders))
    }
}

/// Convenience constructor mirroring [`Basis1D::new`].
pub fn build_basis(m: usize) -> Result<Basis1D> {
    Basis1D::new(m)
}

/// In place: Legendre coefficients `a` to basis coefficients `c`, using
/// `a_j = c_{j+2} - c_j` for `j >= 2` and `a_j = c_j + c_{j+2}` for `j < 2`.
fn legendre_to_basis_inplace(v: &mut [f64]) {
    let m = v.len();
    for j in (0..m).rev() {
        let above = if j + 2 < m { v[j + 2] } else { 0.0 };
        v[j] = if j >= 2 { above - v[j] } else { v[j] - above };
    }
}

fn symmetrize(a: &mut DMatrix<f64>) {
    let n = a.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
}

/// Solves `stiff z = lambda mass z` for symmetric `stiff` and SPD `mass`.
///
/// Reduces to a standard symmetric problem through the Cholesky factor of
/// `mass`. Eigenvalues are returned ascending and eigenvectors are
/// normalized so that `Z^T mass Z = I`.
pub fn generalized_eig(mass: &DMatrix<f64>, stiff: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = mass.nrows();
    if mass.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: mass.ncols(),
        });
    }
    if stiff.nrows() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: stiff.nrows(),
        });
    }
    if stiff.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: stiff.ncols(),
        });
    }
    let chol = Cholesky::new(mass.clone()).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.l();
    // C = L^-1 K L^-T
    let lk = l.solve_lower_triangular(stiff).ok_or(Error::NotPositiveDefinite)?;
    let mut c = l
        .solve_lower_triangular(&lk.transpose())
        .ok_or(Error::NotPositiveDefinite)?;
    symmetrize(&mut c);

    let eig = SymmetricEigen::try_new(c, EIG_TOL, EIG_MAX_ITER)
        .ok_or_else(|| Error::EigenFailure("symmetric QR iteration did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

    let vals = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut v = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        v.set_column(col, &eig.eigenvectors.column(i));
    }
    let z = l
        .transpose()
        .solve_upper_triangular(&v)
        .ok_or(Error::NotPositiveDefinite)?;
    Ok((vals, z))
}

/// Replaces the numerically computed null pair with the exact constant mode
/// and mass-orthogonalizes the remaining eigenvectors against it.
fn pin_constant_mode(mass: &DMatrix<f64>, vals: &mut DVector<f64>, vecs: &mut DMatrix<f64>) -> Result<()> {
    let n = vals.len();
    let scale = vals.amax().max(1.0);
    if vals[0].abs() > 1e-10 * scale {
        return Err(Error::EigenFailure(format!(
            "smallest eigenvalue {:e} is not a null mode",
            vals[0]
        )));
    }
    if n > 1 && vals[1] <= 1e-10 * scale {
        return Err(Error::EigenFailure("stiffness has more than one null mode".into()));
    }
    vals[0] = 0.0;
    let mut z0 = DVector::zeros(n);
    z0[0] = 1.0 / mass[(0, 0)].sqrt();
    vecs.set_column(0, &z0);
    let mz0 = mass * &z0;
    for col in 1..n {
        let mut z = vecs.column(col).into_owned();
        let proj = z.dot(&mz0);
        z.axpy(-proj, &z0, 1.0);
        let norm = z.dot(&(mass * &z)).sqrt();
        z /= norm;
        vecs.set_column(col, &z);
    }
    Ok(())
}
