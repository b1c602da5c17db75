//! Double-well free energy, truncated to quadratic growth outside [-2, 2].
//!
//! Inside the truncation points the potential is `(phi^2 - 1)^2 / 4`;
//! outside it continues as the quadratic matching value, slope and
//! curvature at `+-2`, so `f = F'` is globally Lipschitz.

use serde::{Deserialize, Serialize};

/// Lipschitz constant of `f` (bound on `|f'|`).
pub const LIPSCHITZ_F: f64 = 11.0;
/// Bound on `|f''|` away from the junctions.
pub const LIPSCHITZ_F_PRIME: f64 = 12.0;

const JUNCTION: f64 = 2.0;

/// Truncated double-well potential `F`.
pub fn f_energy_trunc(phi: f64) -> f64 {
    if phi > JUNCTION {
        let s = phi - JUNCTION;
        5.5 * s * s + 6.0 * s + 2.25
    } else if phi < -JUNCTION {
        let s = phi + JUNCTION;
        5.5 * s * s - 6.0 * s + 2.25
    } else {
        let q = phi * phi - 1.0;
        0.25 * q * q
    }
}

/// `f = F'` of the truncated potential.
pub fn f_trunc(phi: f64) -> f64 {
    if phi > JUNCTION {
        11.0 * (phi - JUNCTION) + 6.0
    } else if phi < -JUNCTION {
        11.0 * (phi + JUNCTION) - 6.0
    } else {
        phi * phi * phi - phi
    }
}

/// `f'` of the truncated potential.
pub fn fprime_trunc(phi: f64) -> f64 {
    if phi.abs() > JUNCTION {
        11.0
    } else {
        3.0 * phi * phi - 1.0
    }
}

/// `(L, L2)`: bounds on `|f'|` and `|f''|`.
pub fn lipschitz_bounds() -> (f64, f64) {
    (LIPSCHITZ_F, LIPSCHITZ_F_PRIME)
}

/// Which nonlinearity the integrator evaluates.
///
/// `Quartic` is the untruncated double well; it violates the global
/// Lipschitz bound the stability thresholds rely on and is only meant for
/// experiments. `Zero` switches the nonlinearity off, which turns the
/// scheme into a linear recurrence (used for self-tests).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Potential {
    #[default]
    Truncated,
    Quartic,
    Zero,
}

impl Potential {
    /// Free energy density `F`.
    pub fn energy(self, phi: f64) -> f64 {
        match self {
            Potential::Truncated => f_energy_trunc(phi),
            Potential::Quartic => {
                let q = phi * phi - 1.0;
                0.25 * q * q
            }
            Potential::Zero => 0.0,
        }
    }

    /// `f = F'`.
    pub fn derivative(self, phi: f64) -> f64 {
        match self {
            Potential::Truncated => f_trunc(phi),
            Potential::Quartic => phi * phi * phi - phi,
            Potential::Zero => 0.0,
        }
    }

    /// Lipschitz constant of `f` used in the discrete energy. The quartic
    /// has none; its value on [-2, 2] is reported.
    pub fn lipschitz(self) -> f64 {
        match self {
            Potential::Truncated | Potential::Quartic => LIPSCHITZ_F,
            Potential::Zero => 0.0,
        }
    }
}
