//! Error norms against a reference solution, convergence orders and
//! per-step energy/mass traces.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field2d::{self, Field2D};
use crate::quad_legendre::Basis1D;
use crate::stepper::{StepOperator, StepperState};

/// Two fields compared in the `H^-1` norm must carry the same mass to
/// this tolerance.
pub const MEAN_MISMATCH_TOL: f64 = 1e-8;

/// One row of an energy trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub energy: f64,
    pub discrete_energy: f64,
    pub mass: f64,
    /// L2 norm of `phi^n - phi^{n-1}`.
    pub dt_norm: f64,
}

impl EnergyRecord {
    /// `E_CN - E`, the increment penalty.
    pub fn energy_gap(&self) -> f64 {
        self.discrete_energy - self.energy
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorTriple {
    pub h_minus1: f64,
    pub l2: f64,
    pub h1: f64,
}

/// Norms of `phi - phi_ref`; `h1` is the full norm `sqrt(l2^2 + |e|_1^2)`.
pub fn error_norms(phi: &Field2D, phi_ref: &Field2D, basis: &Basis1D) -> Result<ErrorTriple> {
    phi.check_basis(basis)?;
    phi_ref.check_basis(basis)?;
    let e = phi - phi_ref;
    let diff = field2d::mean(&e, basis);
    if diff.abs() > MEAN_MISMATCH_TOL {
        return Err(Error::MeanMismatch { diff });
    }
    let l2 = field2d::l2_norm(&e, basis);
    let semi = field2d::h1_seminorm(&e, basis);
    let mut centered = e;
    centered.coeffs_mut()[(0, 0)] -= diff * mean_unit(basis);
    Ok(ErrorTriple {
        h_minus1: field2d::h_minus1_norm(&centered, basis)?,
        l2,
        h1: (l2 * l2 + semi * semi).sqrt(),
    })
}

// coefficient of the constant 1 on the (0, 0) mode
fn mean_unit(basis: &Basis1D) -> f64 {
    let one = Field2D::constant(basis, 1.0);
    one.coeffs()[(0, 0)]
}

/// `order_k = ln(e_{k-1}/e_k) / ln(tau_{k-1}/tau_k)` for consecutive pairs.
pub fn convergence_orders(errors: &[f64], taus: &[f64]) -> Result<Vec<f64>> {
    if errors.len() != taus.len() {
        return Err(Error::DimensionMismatch {
            expected: taus.len(),
            found: errors.len(),
        });
    }
    if errors.len() < 2 {
        return Err(Error::InvalidArgument("need at least two errors".into()));
    }
    if let Some(e) = errors.iter().find(|e| !(e.is_finite() && **e > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "errors must be positive and finite, got {e}"
        )));
    }
    if taus.iter().any(|t| !(t.is_finite() && *t > 0.0)) || taus.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument(
            "taus must be positive and strictly decreasing".into(),
        ));
    }
    Ok(errors
        .windows(2)
        .zip(taus.windows(2))
        .map(|(e, t)| (e[0] / e[1]).ln() / (t[0] / t[1]).ln())
        .collect())
}

/// Builds the record for `state` at `t = n tau`.
pub fn energy_record(state: &StepperState, op: &StepOperator) -> Result<EnergyRecord> {
    let basis = op.basis();
    let rec = EnergyRecord {
        t: state.n as f64 * op.params().tau,
        energy: op.energy(&state.phi_n)?,
        discrete_energy: op.discrete_energy(&state.phi_n, &state.phi_nm1)?,
        mass: field2d::mean(&state.phi_n, basis),
        dt_norm: field2d::l2_norm(&state.increment(), basis),
    };
    let finite = [rec.t, rec.energy, rec.discrete_energy, rec.mass, rec.dt_norm]
        .iter()
        .all(|v| v.is_finite());
    if !finite {
        return Err(Error::NonFinite("energy record"));
    }
    Ok(rec)
}

/// Appends the record for `state` to `trace`.
pub fn record(state: &StepperState, op: &StepOperator, trace: &mut Vec<EnergyRecord>) -> Result<()> {
    trace.push(energy_record(state, op)?);
    Ok(())
}
