//! Reproduction driver: seeded initial data, convergence studies,
//! stability sweeps, energy traces, snapshots and output files.

pub mod config;
pub mod initial;
pub mod output;
pub mod snapshot;
pub mod studies;

pub use config::{ConfigOverrides, ExperimentConfig, ExperimentKind, InitialData};
pub use initial::{preparation_params, prepare_phi1, random_initial};
pub use snapshot::{snapshot_read, snapshot_write};
pub use studies::{
    evolve, run_convergence_study, run_energy_trace, run_stability_sweep, ConvergenceTable, Stabilizer, SweepCell,
    SweepResult, TraceRun,
};
