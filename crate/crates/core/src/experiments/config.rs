use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::stepper::SchemeParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    StabilitySweep,
    Convergence,
    EnergyTrace,
    Evolve,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::StabilitySweep => "stability_sweep",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::EnergyTrace => "energy_trace",
            ExperimentKind::Evolve => "evolve",
        }
    }
}

/// Which field the runs start from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialData {
    /// Projected uniform noise on the dealiasing grid.
    Random,
    /// The random field evolved for `64 eps^3` time units.
    Prepared,
}

/// A fully specified experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub m: usize,
    pub epsilon: f64,
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    /// Step sizes: the convergence ladder, the trace step sizes, the sweep
    /// rows, or a single entry for `evolve`.
    pub taus: Vec<f64>,
    pub reference_tau: f64,
    pub final_time: f64,
    pub seed: u64,
    pub max_steps: usize,
    pub initial: InitialData,
    pub potential: Potential,
    pub out_dir: PathBuf,
    /// Sweep: relaxation parameters.
    pub gammas: Vec<f64>,
    /// Sweep: fixed `B` values for the `A` ladder.
    pub fixed_b: Vec<f64>,
    /// Sweep: fixed `A` values for the `B` ladder.
    pub fixed_a: Vec<f64>,
    /// Sweep: steps a run must survive.
    pub sweep_steps: usize,
    /// Evolve: stop once the increment and the energy gap fall below this.
    pub steady_tol: Option<f64>,
}

/// Partial configuration as read from a JSON file or the command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub kind: Option<ExperimentKind>,
    pub m: Option<usize>,
    pub epsilon: Option<f64>,
    pub gamma: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub taus: Option<Vec<f64>>,
    pub reference_tau: Option<f64>,
    pub final_time: Option<f64>,
    pub seed: Option<u64>,
    pub max_steps: Option<usize>,
    pub initial: Option<InitialData>,
    pub potential: Option<Potential>,
    pub out_dir: Option<PathBuf>,
    pub gammas: Option<Vec<f64>>,
    pub fixed_b: Option<Vec<f64>>,
    pub fixed_a: Option<Vec<f64>>,
    pub sweep_steps: Option<usize>,
    pub steady_tol: Option<f64>,
}

impl ConfigOverrides {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    /// Fields set in `other` win.
    pub fn merge(self, other: ConfigOverrides) -> ConfigOverrides {
        macro_rules! pick {
            ($($f:ident),*) => { ConfigOverrides { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            kind,
            m,
            epsilon,
            gamma,
            a,
            b,
            taus,
            reference_tau,
            final_time,
            seed,
            max_steps,
            initial,
            potential,
            out_dir,
            gammas,
            fixed_b,
            fixed_a,
            sweep_steps,
            steady_tol
        )
    }
}

impl ExperimentConfig {
    /// Defaults for `kind`: `eps = 0.05`, `M = 63`, `gamma = 0.0025`,
    /// `T = 12.8` throughout; `A = 0.1, B = 40` for convergence and
    /// `A = 1, B = 20` for traces.
    pub fn defaults(kind: ExperimentKind) -> Self {
        let mut c = ExperimentConfig {
            kind,
            m: 63,
            epsilon: 0.05,
            gamma: 0.0025,
            a: 0.1,
            b: 40.0,
            taus: vec![0.16, 0.08, 0.04, 0.02, 0.01, 0.005],
            reference_tau: 1e-3,
            final_time: 12.8,
            seed: 20_190_101,
            max_steps: 1_000_000,
            initial: InitialData::Prepared,
            potential: Potential::Truncated,
            out_dir: PathBuf::from("out"),
            gammas: vec![0.0025, 1.0],
            fixed_b: vec![0.0, 10.0],
            fixed_a: vec![0.0, 4.0],
            sweep_steps: 4096,
            steady_tol: None,
        };
        match kind {
            ExperimentKind::Convergence => {}
            ExperimentKind::EnergyTrace => {
                c.a = 1.0;
                c.b = 20.0;
                c.taus = vec![0.4, 0.1, 0.01];
            }
            ExperimentKind::StabilitySweep => {
                c.initial = InitialData::Random;
                c.taus = vec![10.0, 1.0, 0.1, 0.01, 1e-3, 1e-4, 1e-5, 1e-6];
            }
            ExperimentKind::Evolve => {
                c.a = 1.0;
                c.b = 20.0;
                c.taus = vec![0.01];
            }
        }
        c
    }

    /// Defaults for the resolved kind with `overrides` applied, validated.
    pub fn resolve(overrides: ConfigOverrides) -> Result<Self> {
        let kind = overrides
            .kind
            .ok_or_else(|| Error::Config("experiment kind not specified".into()))?;
        let mut c = Self::defaults(kind);
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = overrides.$f { c.$f = v; })* };
        }
        set!(
            m,
            epsilon,
            gamma,
            a,
            b,
            taus,
            reference_tau,
            final_time,
            seed,
            max_steps,
            initial,
            potential,
            out_dir,
            gammas,
            fixed_b,
            fixed_a,
            sweep_steps
        );
        if overrides.steady_tol.is_some() {
            c.steady_tol = overrides.steady_tol;
        }
        c.validate()?;
        Ok(c)
    }

    /// Scheme parameters at step size `tau`.
    pub fn scheme(&self, tau: f64) -> SchemeParams {
        SchemeParams {
            epsilon: self.epsilon,
            gamma: self.gamma,
            tau,
            a: self.a,
            b: self.b,
        }
    }

    /// Number of steps of size `tau` that reach `final_time` exactly.
    pub fn steps_for(&self, tau: f64) -> Result<usize> {
        let ratio = self.final_time / tau;
        let steps = ratio.round();
        if steps < 1.0 || (ratio - steps).abs() > 1e-9 * ratio.max(1.0) {
            return Err(Error::Config(format!(
                "final time {} is not an integer multiple of tau = {tau}",
                self.final_time
            )));
        }
        let steps = steps as usize;
        if steps > self.max_steps {
            return Err(Error::Config(format!(
                "tau = {tau} needs {steps} steps, above the cap of {}",
                self.max_steps
            )));
        }
        Ok(steps)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.m < 3 {
            return bad(format!("M must be at least 3, got {}", self.m));
        }
        let positive = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        let nonneg = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be nonnegative and finite, got {v}")))
            }
        };
        positive("epsilon", self.epsilon)?;
        positive("gamma", self.gamma)?;
        nonneg("a", self.a)?;
        nonneg("b", self.b)?;
        positive("final_time", self.final_time)?;
        if self.taus.is_empty() {
            return bad("at least one tau is required".into());
        }
        for &t in &self.taus {
            positive("tau", t)?;
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive".into());
        }
        match self.kind {
            ExperimentKind::Convergence => {
                if self.taus.len() < 2 {
                    return bad("convergence needs at least two taus".into());
                }
                if self.taus.windows(2).any(|w| w[1] >= w[0]) {
                    return bad("convergence taus must be strictly decreasing".into());
                }
                positive("reference_tau", self.reference_tau)?;
                if self.reference_tau >= *self.taus.last().unwrap() {
                    return bad("reference_tau must be below every tau".into());
                }
                self.steps_for(self.reference_tau)?;
                for &t in &self.taus {
                    self.steps_for(t)?;
                }
            }
            ExperimentKind::StabilitySweep => {
                if self.gammas.is_empty() || (self.fixed_a.is_empty() && self.fixed_b.is_empty()) {
                    return bad("sweep needs gammas and at least one fixed stabilizer".into());
                }
                for &g in &self.gammas {
                    positive("gamma", g)?;
                }
                for &v in self.fixed_a.iter().chain(&self.fixed_b) {
                    nonneg("fixed stabilizer", v)?;
                }
                if self.sweep_steps == 0 {
                    return bad("sweep_steps must be positive".into());
                }
            }
            ExperimentKind::EnergyTrace => {
                for &t in &self.taus {
                    self.steps_for(t)?;
                }
            }
            ExperimentKind::Evolve => {
                if self.taus.len() != 1 {
                    return bad("evolve takes exactly one tau".into());
                }
                if let Some(tol) = self.steady_tol {
                    positive("steady_tol", tol)?;
                }
            }
        }
        Ok(())
    }

    /// `(name, value)` pairs stamped on every emitted row.
    pub fn provenance(&self) -> Vec<(&'static str, String)> {
        vec![
            ("kind", self.kind.as_str().to_string()),
            ("m", self.m.to_string()),
            ("epsilon", self.epsilon.to_string()),
            ("seed", self.seed.to_string()),
            ("initial", format!("{:?}", self.initial).to_lowercase()),
            ("potential", format!("{:?}", self.potential).to_lowercase()),
            ("final_time", self.final_time.to_string()),
        ]
    }
}
