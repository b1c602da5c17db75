use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use super::config::{ExperimentConfig, ExperimentKind, InitialData};
use super::initial::{preparation_params, prepare_phi1, random_initial};
use crate::diagnostics::{self, convergence_orders, error_norms, EnergyRecord, ErrorTriple};
use crate::error::{Error, Result};
use crate::field2d::{self, Field2D};
use crate::quad_legendre::Basis1D;
use crate::stepper::{SchemeParams, StepOperator, StepperState, BLOWUP_LIMIT};

/// Starting field for `config`: projected noise, optionally prepared.
pub fn initial_field(config: &ExperimentConfig, basis: &Arc<Basis1D>) -> Result<Field2D> {
    let phi0 = random_initial(config.seed, basis)?;
    match config.initial {
        InitialData::Random => Ok(phi0),
        InitialData::Prepared => prepare_phi1(
            &phi0,
            &preparation_params(config.epsilon)?,
            config.potential,
            basis.clone(),
        ),
    }
}

fn operator(config: &ExperimentConfig, basis: &Arc<Basis1D>, tau: f64) -> Result<StepOperator> {
    StepOperator::new(config.scheme(tau), basis.clone(), config.potential)
}

/// Final state of `steps` steps plus the largest mass drift seen.
fn run_tracking_mass(op: &StepOperator, phi0: &Field2D, steps: usize) -> Result<(StepperState, f64)> {
    let basis = op.basis().clone();
    let mass0 = field2d::mean(phi0, &basis);
    let mut drift = 0.0f64;
    let end = op.run(phi0, steps, |s| {
        drift = drift.max((field2d::mean(&s.phi_n, &basis) - mass0).abs());
        Ok(())
    })?;
    check_bounded(&end, &basis)?;
    Ok((end, drift))
}

fn check_bounded(state: &StepperState, basis: &Basis1D) -> Result<()> {
    let nodal = field2d::synthesize(&state.phi_n, basis)?;
    let max_abs = nodal.max_abs();
    if !nodal.is_finite() || max_abs > BLOWUP_LIMIT {
        return Err(Error::Diverged { step: state.n, max_abs });
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub tau: f64,
    pub steps: usize,
    pub errors: ErrorTriple,
    /// Orders against the previous row; `None` on the first.
    pub orders: Option<ErrorTriple>,
    pub mass_drift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub reference_tau: f64,
    pub reference_mass_drift: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    /// Orders for consecutive pairs in the three norms.
    pub fn orders(&self) -> Vec<ErrorTriple> {
        self.rows.iter().filter_map(|r| r.orders).collect()
    }

    pub fn max_mass_drift(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| r.mass_drift)
            .fold(self.reference_mass_drift, f64::max)
    }
}

/// Runs the reference and every ladder step size to `final_time` from the
/// configured initial data and tabulates errors and orders.
pub fn run_convergence_study(config: &ExperimentConfig) -> Result<ConvergenceTable> {
    if config.kind != ExperimentKind::Convergence {
        return Err(Error::Config("not a convergence config".into()));
    }
    config.validate()?;
    let basis = Arc::new(Basis1D::new(config.m)?);
    let phi1 = initial_field(config, &basis)?;
    let mut taus = vec![config.reference_tau];
    taus.extend_from_slice(&config.taus);
    let runs: Vec<(Field2D, f64, usize)> = taus
        .par_iter()
        .map(|&tau| {
            let steps = config.steps_for(tau)?;
            let (end, drift) = run_tracking_mass(&operator(config, &basis, tau)?, &phi1, steps)?;
            Ok((end.phi_n, drift, steps))
        })
        .collect::<Result<_>>()?;
    let (reference, reference_mass_drift, _) = &runs[0];
    let errors: Vec<ErrorTriple> = runs[1..]
        .iter()
        .map(|(phi, _, _)| error_norms(phi, reference, &basis))
        .collect::<Result<_>>()?;
    let column = |pick: fn(&ErrorTriple) -> f64| -> Result<Vec<f64>> {
        convergence_orders(&errors.iter().map(pick).collect::<Vec<_>>(), &config.taus)
    };
    let (oh, ol, o1) = (column(|e| e.h_minus1)?, column(|e| e.l2)?, column(|e| e.h1)?);
    let rows = config
        .taus
        .iter()
        .zip(&runs[1..])
        .zip(&errors)
        .enumerate()
        .map(|(k, ((&tau, (_, drift, steps)), e))| ConvergenceRow {
            tau,
            steps: *steps,
            errors: *e,
            orders: (k > 0).then(|| ErrorTriple {
                h_minus1: oh[k - 1],
                l2: ol[k - 1],
                h1: o1[k - 1],
            }),
            mass_drift: *drift,
        })
        .collect();
    Ok(ConvergenceTable {
        reference_tau: config.reference_tau,
        reference_mass_drift: *reference_mass_drift,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stabilizer {
    A,
    B,
}

impl Stabilizer {
    pub fn as_str(self) -> &'static str {
        match self {
            Stabilizer::A => "a",
            Stabilizer::B => "b",
        }
    }
}

/// `{0, 2^i gamma}` for `A` and `{0, 2^i}` for `B`, `i = 0..=7`.
pub fn ladder(which: Stabilizer, gamma: f64) -> Vec<f64> {
    let unit = match which {
        Stabilizer::A => gamma,
        Stabilizer::B => 1.0,
    };
    std::iter::once(0.0)
        .chain((0..8).map(|i| f64::from(1u32 << i) * unit))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepCell {
    pub gamma: f64,
    pub tau: f64,
    /// Stabilizer being minimized.
    pub ladder: Stabilizer,
    /// Value of the other stabilizer.
    pub fixed: f64,
    /// Smallest stable ladder value; `None` if every value blew up.
    pub min_stable: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    pub fn find(&self, gamma: f64, tau: f64, ladder: Stabilizer, fixed: f64) -> Option<&SweepCell> {
        self.cells
            .iter()
            .find(|c| c.gamma == gamma && c.tau == tau && c.ladder == ladder && c.fixed == fixed)
    }
}

/// Whether `steps` steps from `phi0` stay bounded.
pub fn survives(op: &StepOperator, phi0: &Field2D, steps: usize) -> Result<bool> {
    let outcome = op
        .run(phi0, steps, |_| Ok(()))
        .and_then(|end| check_bounded(&end, op.basis()));
    match outcome {
        Ok(()) => Ok(true),
        Err(Error::Diverged { .. }) | Err(Error::NonFinite(_)) => Ok(false),
        Err(e) => Err(e),
    }
}

fn sweep_cell(
    config: &ExperimentConfig,
    basis: &Arc<Basis1D>,
    phi0: &Field2D,
    (gamma, tau, which, fixed): (f64, f64, Stabilizer, f64),
) -> Result<SweepCell> {
    let mut min_stable = None;
    for value in ladder(which, gamma) {
        let (a, b) = match which {
            Stabilizer::A => (value, fixed),
            Stabilizer::B => (fixed, value),
        };
        let params = SchemeParams {
            epsilon: config.epsilon,
            gamma,
            tau,
            a,
            b,
        };
        let op = StepOperator::new(params, basis.clone(), config.potential)?;
        if survives(&op, phi0, config.sweep_steps)? {
            min_stable = Some(value);
            break;
        }
    }
    Ok(SweepCell {
        gamma,
        tau,
        ladder: which,
        fixed,
        min_stable,
    })
}

/// Minimal stable ladder values over `gammas x taus x` fixed
/// counterparts, cells evaluated in parallel.
pub fn run_stability_sweep(config: &ExperimentConfig) -> Result<SweepResult> {
    if config.kind != ExperimentKind::StabilitySweep {
        return Err(Error::Config("not a stability sweep config".into()));
    }
    config.validate()?;
    let basis = Arc::new(Basis1D::new(config.m)?);
    let phi0 = initial_field(config, &basis)?;
    let mut jobs = Vec::new();
    for &gamma in &config.gammas {
        for &tau in &config.taus {
            jobs.extend(config.fixed_b.iter().map(|&f| (gamma, tau, Stabilizer::A, f)));
            jobs.extend(config.fixed_a.iter().map(|&f| (gamma, tau, Stabilizer::B, f)));
        }
    }
    let cells = jobs
        .into_par_iter()
        .map(|job| sweep_cell(config, &basis, &phi0, job))
        .collect::<Result<_>>()?;
    Ok(SweepResult { cells })
}

#[derive(Debug, Clone, Serialize)]
pub struct TraceRun {
    pub tau: f64,
    /// One record per step, starting with `t = 0`.
    pub records: Vec<EnergyRecord>,
    /// `(step, max |phi|)` if the run blew up.
    pub diverged: Option<(usize, f64)>,
}

fn trace_one(op: &StepOperator, phi0: &Field2D, steps: usize) -> Result<TraceRun> {
    let mut records = Vec::with_capacity(steps + 1);
    let mut state = StepperState::initial(phi0.clone());
    diagnostics::record(&state, op, &mut records)?;
    let mut diverged = None;
    for _ in 0..steps {
        match op.step(&state) {
            Ok((next, _)) => state = next,
            Err(Error::Diverged { step, max_abs }) => {
                diverged = Some((step, max_abs));
                break;
            }
            Err(e) => return Err(e),
        }
        match diagnostics::record(&state, op, &mut records) {
            Ok(()) => {}
            Err(Error::NonFinite(_)) => {
                diverged = Some((state.n, f64::INFINITY));
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(TraceRun {
        tau: op.params().tau,
        records,
        diverged,
    })
}

/// Energy, discrete energy, mass and increment per step for each
/// configured step size.
pub fn run_energy_trace(config: &ExperimentConfig) -> Result<Vec<TraceRun>> {
    if config.kind != ExperimentKind::EnergyTrace {
        return Err(Error::Config("not an energy trace config".into()));
    }
    config.validate()?;
    let basis = Arc::new(Basis1D::new(config.m)?);
    let phi0 = initial_field(config, &basis)?;
    config
        .taus
        .par_iter()
        .map(|&tau| trace_one(&operator(config, &basis, tau)?, &phi0, config.steps_for(tau)?))
        .collect()
}

#[derive(Debug, Clone)]
pub struct EvolveOutcome {
    pub state: StepperState,
    pub trace: Vec<EnergyRecord>,
    /// Whether the steady-state tolerance was met before the step cap.
    pub steady: bool,
}

/// Integrates to `final_time` (at most `max_steps` steps), stopping early
/// once `dt_norm` and `E_CN - E` both fall to `steady_tol`.
pub fn evolve(config: &ExperimentConfig) -> Result<EvolveOutcome> {
    if config.kind != ExperimentKind::Evolve {
        return Err(Error::Config("not an evolve config".into()));
    }
    config.validate()?;
    let basis = Arc::new(Basis1D::new(config.m)?);
    let phi0 = initial_field(config, &basis)?;
    evolve_from(config, &basis, &phi0)
}

pub fn evolve_from(config: &ExperimentConfig, basis: &Arc<Basis1D>, phi0: &Field2D) -> Result<EvolveOutcome> {
    let tau = config.taus[0];
    let op = operator(config, basis, tau)?;
    let steps = ((config.final_time / tau).round() as usize).clamp(1, config.max_steps);
    let mut state = StepperState::initial(phi0.clone());
    let mut trace = Vec::new();
    diagnostics::record(&state, &op, &mut trace)?;
    let mut steady = false;
    for _ in 0..steps {
        state = op.step(&state)?.0;
        diagnostics::record(&state, &op, &mut trace)?;
        let last = trace.last().expect("record just pushed");
        if let Some(tol) = config.steady_tol {
            if last.dt_norm <= tol && last.energy_gap().abs() <= tol {
                steady = true;
                break;
            }
        }
    }
    check_bounded(&state, basis)?;
    Ok(EvolveOutcome { state, trace, steady })
}
