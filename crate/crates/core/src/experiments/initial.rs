//! Seeded initial data.
//!
//! Noise is drawn from ChaCha20 (`rand_chacha` 0.9, `seed_from_u64`). Each
//! value takes the top 53 bits of `next_u64` as `u` in `[0, 1)` and maps
//! it to `2u - 1`; the single outcome `-1` is redrawn so the support is the
//! open interval. Values fill the `2M x 2M` dealiasing grid with the
//! x-index outer.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::error::Result;
use crate::field2d::{self, Field2D, NodalGrid2D};
use crate::potential::{Potential, LIPSCHITZ_F};
use crate::quad_legendre::Basis1D;
use crate::stepper::{stability_thresholds, SchemeParams, StepOperator};

/// Steps of the preparation run.
pub const PREP_STEPS: usize = 64;
/// Relaxation parameter of the preparation run.
pub const PREP_GAMMA: f64 = 1.0;

fn uniform_open(rng: &mut ChaCha20Rng) -> f64 {
    loop {
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        let v = 2.0 * u - 1.0;
        if v > -1.0 {
            return v;
        }
    }
}

/// Uniform `(-1, 1)` noise at the dealiasing nodes.
pub fn random_nodal(seed: u64, basis: &Basis1D) -> NodalGrid2D {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let n = basis.quad().len();
    let mut values = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            values[(i, j)] = uniform_open(&mut rng);
        }
    }
    NodalGrid2D { values }
}

/// L2 projection of [`random_nodal`] onto the basis.
pub fn random_initial(seed: u64, basis: &Basis1D) -> Result<Field2D> {
    field2d::project(&random_nodal(seed, basis), basis)
}

/// Parameters of the standard preparation run: step `eps^3`,
/// `gamma = 1` and both stabilizers at their energy-stability thresholds.
/// At those sizes the stiff modes of projected noise are damped instead of
/// ringing from step to step.
pub fn preparation_params(epsilon: f64) -> Result<SchemeParams> {
    let base = SchemeParams {
        epsilon,
        gamma: PREP_GAMMA,
        tau: epsilon.powi(3),
        a: 0.0,
        b: 0.0,
    };
    let t = stability_thresholds(&base, LIPSCHITZ_F)?;
    let params = base.with_stabilizers(t.a_min, t.b_min);
    params.validate()?;
    Ok(params)
}

/// Evolves `phi0` for [`PREP_STEPS`] steps of `params.tau`; with
/// [`preparation_params`] this covers `64 eps^3` time units.
pub fn prepare_phi1(
    phi0: &Field2D,
    params: &SchemeParams,
    potential: Potential,
    basis: Arc<Basis1D>,
) -> Result<Field2D> {
    let op = StepOperator::new(*params, basis, potential)?;
    Ok(op.run(phi0, PREP_STEPS, |_| Ok(()))?.phi_n)
}
