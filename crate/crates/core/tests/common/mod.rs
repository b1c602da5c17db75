//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use slcn::potential::Potential;
use slcn::quad_legendre::{gauss_rule, Basis1D};
use slcn::{Field2D, SchemeParams};

/// Deterministic pseudo-random coefficients in [-scale, scale], decaying
/// like 1/(1 + j + k)^2 so the field stays smooth.
pub fn smooth_random_field(m: usize, seed: u64, scale: f64) -> Field2D {
    let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(1);
    let coeffs = DMatrix::from_fn(m, m, |j, k| {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        let u = (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
        scale * u / ((1 + j + k) as f64).powi(2)
    });
    Field2D::from_coeffs(coeffs).unwrap()
}

/// Nodal projection of a smooth function of (x, y).
pub fn project_fn<F: Fn(f64, f64) -> f64>(basis: &Basis1D, f: F) -> Field2D {
    let nodes = basis.quad().nodes.clone();
    let n = nodes.len();
    let grid = slcn::field2d::NodalGrid2D {
        values: DMatrix::from_fn(n, n, |i, j| f(nodes[i], nodes[j])),
    };
    slcn::field2d::project(&grid, basis).unwrap()
}

/// Evaluates a field at a point by the direct double sum.
pub fn eval_point(basis: &Basis1D, f: &Field2D, x: f64, y: f64) -> f64 {
    let m = basis.dim();
    let px: Vec<f64> = (0..m).map(|k| basis.eval_mode(k, x).unwrap().0).collect();
    let py: Vec<f64> = (0..m).map(|k| basis.eval_mode(k, y).unwrap().0).collect();
    let mut s = 0.0;
    for (j, pj) in px.iter().enumerate() {
        for (k, pk) in py.iter().enumerate() {
            s += f.coeffs()[(j, k)] * pj * pk;
        }
    }
    s
}

/// Galerkin load of `g(u(x, y))` with an `n`-point rule per direction,
/// evaluated pointwise (no tensor tricks).
pub fn load_by_quadrature<G: Fn(f64) -> f64>(basis: &Basis1D, u: &Field2D, g: G, n: usize) -> DMatrix<f64> {
    let m = basis.dim();
    let rule = gauss_rule(n).unwrap();
    let modes: Vec<Vec<f64>> = rule
        .nodes
        .iter()
        .map(|&x| (0..m).map(|k| basis.eval_mode(k, x).unwrap().0).collect())
        .collect();
    let mut load = DMatrix::zeros(m, m);
    for (a, &wa) in rule.weights.iter().enumerate() {
        for (c, &wc) in rule.weights.iter().enumerate() {
            let mut val = 0.0;
            for j in 0..m {
                for k in 0..m {
                    val += u.coeffs()[(j, k)] * modes[a][j] * modes[c][k];
                }
            }
            let gv = wa * wc * g(val);
            for j in 0..m {
                for k in 0..m {
                    load[(j, k)] += gv * modes[a][j] * modes[c][k];
                }
            }
        }
    }
    load
}

fn vec_of(c: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(c.as_slice())
}

fn mat_of(v: &[f64], m: usize) -> DMatrix<f64> {
    DMatrix::from_column_slice(m, m, v)
}

/// One scheme step by assembling and LU-solving the full coupled block
/// system for `(phi^{n+1}, mu)` of size `2 M^2`.
pub fn dense_step(
    basis: &Basis1D,
    params: &SchemeParams,
    potential: Potential,
    phi_n: &Field2D,
    phi_nm1: &Field2D,
) -> (Field2D, Field2D) {
    let m = basis.dim();
    let n2 = m * m;
    let mass = basis.mass();
    let stiff = basis.stiff();
    let mass2 = mass.kronecker(mass);
    let stiff2 = mass.kronecker(stiff) + stiff.kronecker(mass);
    let SchemeParams {
        epsilon,
        gamma,
        tau,
        a,
        b,
    } = *params;

    let extrap = &(phi_n * 1.5) - &(phi_nm1 * 0.5);
    let load = load_by_quadrature(basis, &extrap, |p| potential.derivative(p), 2 * m);

    let cn = vec_of(phi_n.coeffs());
    let cm = vec_of(phi_nm1.coeffs());
    let mut sys = DMatrix::zeros(2 * n2, 2 * n2);
    let mut rhs = DVector::zeros(2 * n2);
    // mass (phi' - phi)/tau + gamma K mu = 0
    sys.view_mut((0, 0), (n2, n2)).copy_from(&(&mass2 / tau));
    sys.view_mut((0, n2), (n2, n2)).copy_from(&(&stiff2 * gamma));
    rhs.rows_mut(0, n2).copy_from(&(&mass2 * &cn / tau));
    // mass mu - (eps/2 + A tau) K phi' - B mass phi' = known
    let lhs_phi = -(&stiff2 * (0.5 * epsilon + a * tau)) - &mass2 * b;
    sys.view_mut((n2, 0), (n2, n2)).copy_from(&lhs_phi);
    sys.view_mut((n2, n2), (n2, n2)).copy_from(&mass2);
    let known = &stiff2 * &cn * (0.5 * epsilon - a * tau) + vec_of(&load) / epsilon + &mass2 * (&cm - &cn * 2.0) * b;
    rhs.rows_mut(n2, n2).copy_from(&known);

    let sol = sys.lu().solve(&rhs).expect("nonsingular block system");
    let phi = Field2D::from_coeffs(mat_of(&sol.as_slice()[..n2], m)).unwrap();
    let mu = Field2D::from_coeffs(mat_of(&sol.as_slice()[n2..], m)).unwrap();
    (phi, mu)
}

/// Weak-form residuals of both scheme equations against every test
/// function, as max-abs over modes.
pub fn weak_residuals(
    basis: &Basis1D,
    params: &SchemeParams,
    potential: Potential,
    phi_np1: &Field2D,
    phi_n: &Field2D,
    phi_nm1: &Field2D,
    mu: &Field2D,
) -> (f64, f64) {
    let m = basis.dim();
    let mass = basis.mass();
    let stiff = basis.stiff();
    let mm = |c: &DMatrix<f64>| mass * c * mass;
    let kk = |c: &DMatrix<f64>| stiff * c * mass + mass * c * stiff;
    let SchemeParams {
        epsilon,
        gamma,
        tau,
        a,
        b,
    } = *params;
    let (p1, p0, pm) = (phi_np1.coeffs(), phi_n.coeffs(), phi_nm1.coeffs());
    let r1 = mm(&(p1 - p0)) / tau + kk(mu.coeffs()) * gamma;
    let extrap = &(phi_n * 1.5) - &(phi_nm1 * 0.5);
    let load = load_by_quadrature(basis, &extrap, |p| potential.derivative(p), 2 * m);
    let r2 = mm(mu.coeffs())
        - kk(&(p1 + p0)) * (0.5 * epsilon)
        - load / epsilon
        - kk(&(p1 - p0)) * (a * tau)
        - mm(&(p1 - p0 * 2.0 + pm)) * b;
    (r1.amax(), r2.amax())
}
