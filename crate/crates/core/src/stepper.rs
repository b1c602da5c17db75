//! Stabilized linear Crank-Nicolson time stepping.
//!
//! Each step solves the coupled weak system for `(phi^{n+1}, mu^{n+1/2})`
//!
//! ```text
//! (phi^{n+1} - phi^n, w) / tau = -gamma (grad mu, grad w)
//! (mu, v) = eps/2 (grad(phi^{n+1} + phi^n), grad v) + 1/eps (f(3/2 phi^n - 1/2 phi^{n-1}), v)
//!         + A tau (grad(phi^{n+1} - phi^n), grad v) + B (phi^{n+1} - 2 phi^n + phi^{n-1}, v)
//! ```
//!
//! Eliminating `mu` and moving to the mass-orthonormal tensor eigenbasis
//! makes every mode independent: with `lambda = lambda_i + lambda_j`,
//! `d * phi_hat^{n+1} = rhs` where
//! `d = 1/tau + gamma lambda ((eps/2 + A tau) lambda + B)`.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field2d::{self, Field2D, NodalGrid2D};
use crate::potential::Potential;
use crate::quad_legendre::Basis1D;

/// Nodal magnitude beyond which a run is declared unstable.
pub const BLOWUP_LIMIT: f64 = 1e6;

/// Scalar parameters of the scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    /// Interface thickness.
    pub epsilon: f64,
    /// Mobility / relaxation parameter.
    pub gamma: f64,
    /// Time step.
    pub tau: f64,
    /// Coefficient of `-A tau Delta (phi^{n+1} - phi^n)`.
    pub a: f64,
    /// Coefficient of `B (phi^{n+1} - 2 phi^n + phi^{n-1})`.
    pub b: f64,
}

impl SchemeParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.epsilon, self.gamma, self.tau, self.a, self.b];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("scheme parameters must be finite".into()));
        }
        if self.epsilon <= 0.0 || self.gamma <= 0.0 || self.tau <= 0.0 {
            return Err(Error::InvalidArgument(
                "epsilon, gamma and tau must be strictly positive".into(),
            ));
        }
        if self.a < 0.0 || self.b < 0.0 {
            return Err(Error::InvalidArgument("stabilizers A and B must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn with_tau(mut self, tau: f64) -> Self {
        self.tau = tau;
        self
    }

    pub fn with_stabilizers(mut self, a: f64, b: f64) -> Self {
        self.a = a;
        self.b = b;
        self
    }
}

/// Sufficient stabilizer sizes for unconditional energy decay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityThresholds {
    /// `L^2 gamma / (16 eps^2)`, paired with `b_min`.
    pub a_min: f64,
    /// `L / (2 eps)`.
    pub b_min: f64,
    /// `L^2 gamma / (4 eps^2)`, sufficient on its own when `B = 0`.
    pub a_min_b0: f64,
}

pub fn stability_thresholds(params: &SchemeParams, lipschitz: f64) -> Result<StabilityThresholds> {
    if lipschitz.is_nan() || lipschitz <= 0.0 {
        return Err(Error::InvalidArgument("Lipschitz constant must be positive".into()));
    }
    let eps2 = params.epsilon * params.epsilon;
    let l2 = lipschitz * lipschitz;
    Ok(StabilityThresholds {
        a_min: l2 * params.gamma / (16.0 * eps2),
        b_min: lipschitz / (2.0 * params.epsilon),
        a_min_b0: l2 * params.gamma / (4.0 * eps2),
    })
}

/// Two-level history advanced by the scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct StepperState {
    pub phi_n: Field2D,
    pub phi_nm1: Field2D,
    /// Number of steps taken from the initial datum.
    pub n: usize,
    /// `mu^{n-1/2}` from the most recent step.
    pub mu_last: Field2D,
}

impl StepperState {
    /// Degenerate history `phi^{-1} = phi^0` used to start the recurrence.
    pub fn initial(phi0: Field2D) -> Self {
        let mu_last = Field2D::from_coeffs(DMatrix::zeros(phi0.dim(), phi0.dim())).expect("square coefficients");
        Self {
            phi_nm1: phi0.clone(),
            phi_n: phi0,
            n: 0,
            mu_last,
        }
    }

    /// `phi^n - phi^{n-1}`.
    pub fn increment(&self) -> Field2D {
        &self.phi_n - &self.phi_nm1
    }
}

/// Per-mode diagonal of the eliminated step operator, built once per
/// parameter set and reused every step.
#[derive(Debug, Clone)]
pub struct StepOperator {
    basis: Arc<Basis1D>,
    params: SchemeParams,
    potential: Potential,
    /// `lambda_i + lambda_j`
    lambda: DMatrix<f64>,
    /// `d_ij`
    diag: DMatrix<f64>,
}

/// Builds the factorized operator for `params` on `basis`.
pub fn build_stepper(params: SchemeParams, basis: Arc<Basis1D>) -> Result<StepOperator> {
    StepOperator::new(params, basis, Potential::Truncated)
}

impl StepOperator {
    pub fn new(params: SchemeParams, basis: Arc<Basis1D>, potential: Potential) -> Result<Self> {
        params.validate()?;
        let m = basis.dim();
        let ev = basis.eig_vals();
        let lambda = DMatrix::from_fn(m, m, |i, j| ev[i] + ev[j]);
        let SchemeParams {
            epsilon,
            gamma,
            tau,
            a,
            b,
        } = params;
        let diag = lambda.map(|l| 1.0 / tau + gamma * l * ((0.5 * epsilon + a * tau) * l + b));
        Ok(Self {
            basis,
            params,
            potential,
            lambda,
            diag,
        })
    }

    pub fn basis(&self) -> &Arc<Basis1D> {
        &self.basis
    }

    pub fn params(&self) -> &SchemeParams {
        &self.params
    }

    pub fn potential(&self) -> Potential {
        self.potential
    }

    /// Mode diagonal `d_ij` of the eliminated system.
    pub fn diagonal(&self) -> &DMatrix<f64> {
        &self.diag
    }

    /// Advances `state` by one step; returns the new state and
    /// `mu^{n+1/2}`.
    pub fn step(&self, state: &StepperState) -> Result<(StepperState, Field2D)> {
        let basis = &*self.basis;
        state.phi_n.check_basis(basis)?;
        state.phi_nm1.check_basis(basis)?;
        let SchemeParams {
            epsilon,
            gamma,
            tau,
            a,
            b,
        } = self.params;

        let extrapolated = &(&state.phi_n * 1.5) - &(&state.phi_nm1 * 0.5);
        let nodal = field2d::synthesize(&extrapolated, basis)?;
        let max_abs = nodal.max_abs();
        if !nodal.is_finite() || max_abs > BLOWUP_LIMIT {
            return Err(Error::Diverged {
                step: state.n + 1,
                max_abs,
            });
        }
        let pot = self.potential;
        let nonlinear: NodalGrid2D = nodal.map(|p| pot.derivative(p));
        let load_hat = field2d::load_to_eigen(&field2d::galerkin_load(&nonlinear, basis)?, basis) / epsilon;

        let hat_n = field2d::to_eigen(state.phi_n.coeffs(), basis);
        let hat_nm1 = field2d::to_eigen(state.phi_nm1.coeffs(), basis);
        let m = basis.dim();
        let mut hat_np1 = DMatrix::zeros(m, m);
        let mut mu_hat = DMatrix::zeros(m, m);
        for j in 0..m {
            for i in 0..m {
                let l = self.lambda[(i, j)];
                let cn = hat_n[(i, j)];
                let cm = hat_nm1[(i, j)];
                let g = load_hat[(i, j)];
                // mu terms that do not involve phi^{n+1}
                let known = (0.5 * epsilon - a * tau) * l * cn + g + b * (cm - 2.0 * cn);
                let c_new = (cn / tau - gamma * l * known) / self.diag[(i, j)];
                hat_np1[(i, j)] = c_new;
                mu_hat[(i, j)] = known + (0.5 * epsilon + a * tau) * l * c_new + b * c_new;
            }
        }
        let phi_np1 = Field2D::from_coeffs(field2d::from_eigen(&hat_np1, basis))?;
        let mu = Field2D::from_coeffs(field2d::from_eigen(&mu_hat, basis))?;
        if !phi_np1.is_finite() || !mu.is_finite() {
            return Err(Error::Diverged {
                step: state.n + 1,
                max_abs: f64::INFINITY,
            });
        }
        let next = StepperState {
            phi_nm1: state.phi_n.clone(),
            phi_n: phi_np1,
            n: state.n + 1,
            mu_last: mu.clone(),
        };
        Ok((next, mu))
    }

    /// Produces `phi^1` from `phi^0` by one step with degenerate history
    /// `phi^{-1} = phi^0`.
    pub fn bootstrap_first_step(&self, phi0: &Field2D) -> Result<StepperState> {
        let (state, _) = self.step(&StepperState::initial(phi0.clone()))?;
        Ok(state)
    }

    /// Runs `steps` steps from `phi0`, calling `observe` after each one.
    pub fn run<F>(&self, phi0: &Field2D, steps: usize, mut observe: F) -> Result<StepperState>
    where
        F: FnMut(&StepperState) -> Result<()>,
    {
        let mut state = StepperState::initial(phi0.clone());
        for _ in 0..steps {
            state = self.step(&state)?.0;
            observe(&state)?;
        }
        Ok(state)
    }

    /// Ginzburg-Landau energy of `phi` under this operator's parameters.
    pub fn energy(&self, phi: &Field2D) -> Result<f64> {
        energy(phi, self.params.epsilon, self.potential, &self.basis)
    }

    /// Modified energy `E(phi^{n+1}) + (L/(4 eps) + B/2) ||phi^{n+1} - phi^n||^2`.
    pub fn discrete_energy(&self, phi_np1: &Field2D, phi_n: &Field2D) -> Result<f64> {
        discrete_energy(phi_np1, phi_n, &self.params, self.potential, &self.basis)
    }
}

/// `E(phi) = eps/2 ||grad phi||^2 + 1/eps (F(phi), 1)`, with the potential
/// integrated on the dealiasing grid.
pub fn energy(phi: &Field2D, epsilon: f64, potential: Potential, basis: &Basis1D) -> Result<f64> {
    if !phi.is_finite() {
        return Err(Error::NonFinite("field"));
    }
    let grad2 = field2d::gradient_inner(phi, phi, basis);
    let nodal = field2d::synthesize(phi, basis)?;
    let bulk = nodal.map(|p| potential.energy(p)).integrate(basis);
    let e = 0.5 * epsilon * grad2 + bulk / epsilon;
    if !e.is_finite() {
        return Err(Error::NonFinite("energy"));
    }
    Ok(e)
}

/// Prefactor `L/(4 eps) + B/2` of the increment term in the modified energy.
pub fn increment_weight(params: &SchemeParams, lipschitz: f64) -> f64 {
    lipschitz / (4.0 * params.epsilon) + 0.5 * params.b
}

pub fn discrete_energy(
    phi_np1: &Field2D,
    phi_n: &Field2D,
    params: &SchemeParams,
    potential: Potential,
    basis: &Basis1D,
) -> Result<f64> {
    let e = energy(phi_np1, params.epsilon, potential, basis)?;
    let inc = field2d::l2_norm(&(phi_np1 - phi_n), basis);
    Ok(e + increment_weight(params, potential.lipschitz()) * inc * inc)
}
