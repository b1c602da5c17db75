use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use slcn::experiments::output::{write_convergence_csv, write_summary_json, write_sweep_csv, write_trace_csv};
use slcn::experiments::studies::{evolve_from, initial_field};
use slcn::experiments::{
    run_convergence_study, run_energy_trace, run_stability_sweep, snapshot_read, snapshot_write, ConfigOverrides,
    ExperimentConfig, ExperimentKind, InitialData,
};
use slcn::{Basis1D, Error};

/// Stabilized linear Crank-Nicolson Cahn-Hilliard experiments.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one run, writing its energy trace and final snapshot.
    Evolve {
        #[command(flatten)]
        common: CommonArgs,
        /// Start from this snapshot instead of seeded noise.
        #[arg(long)]
        from: Option<PathBuf>,
        /// Stop once the increment and the energy gap fall below this.
        #[arg(long)]
        steady_tol: Option<f64>,
    },
    /// Temporal convergence study against a fine reference run.
    Converge {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        reference_tau: Option<f64>,
    },
    /// Minimal stabilizer sweep.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, num_args = 1.., value_name = "F64")]
        gammas: Option<Vec<f64>>,
        #[arg(long)]
        sweep_steps: Option<usize>,
    },
    /// Energy, discrete energy and mass traces.
    Trace {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// JSON file with configuration fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, num_args = 1.., value_name = "F64")]
    tau: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    stab_a: Option<f64>,
    #[arg(long)]
    stab_b: Option<f64>,
    #[arg(long)]
    final_time: Option<f64>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long, value_parser = parse_initial)]
    initial: Option<InitialData>,
}

fn parse_initial(s: &str) -> Result<InitialData, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("expected `random` or `prepared`, got `{s}`"))
}

impl CommonArgs {
    fn resolve(self, kind: ExperimentKind, extra: ConfigOverrides) -> slcn::Result<ExperimentConfig> {
        let file = match &self.config {
            Some(path) => ConfigOverrides::from_json_file(path)?,
            None => ConfigOverrides::default(),
        };
        if let Some(k) = file.kind {
            if k != kind {
                return Err(Error::Config(format!(
                    "config file is for `{}`, not `{}`",
                    k.as_str(),
                    kind.as_str()
                )));
            }
        }
        let flags = ConfigOverrides {
            kind: Some(kind),
            m: self.m,
            epsilon: self.epsilon,
            gamma: self.gamma,
            a: self.stab_a,
            b: self.stab_b,
            taus: self.tau,
            final_time: self.final_time,
            seed: self.seed,
            max_steps: self.max_steps,
            initial: self.initial,
            out_dir: self.out,
            ..Default::default()
        };
        ExperimentConfig::resolve(file.merge(flags).merge(extra))
    }
}

fn create(dir: &Path, name: &str) -> slcn::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

#[derive(Serialize)]
struct TraceSummary {
    tau: f64,
    steps: usize,
    final_energy: Option<f64>,
    final_discrete_energy: Option<f64>,
    diverged_at_step: Option<usize>,
}

#[derive(Serialize)]
struct EvolveSummary {
    steps: usize,
    steady: bool,
    final_energy: f64,
    final_discrete_energy: f64,
    final_dt_norm: f64,
    mass: f64,
    snapshot: PathBuf,
}

fn run(command: Command) -> slcn::Result<()> {
    match command {
        Command::Evolve {
            common,
            from,
            steady_tol,
        } => {
            let extra = ConfigOverrides {
                steady_tol,
                ..Default::default()
            };
            let config = common.resolve(ExperimentKind::Evolve, extra)?;
            std::fs::create_dir_all(&config.out_dir)?;
            let basis = Arc::new(Basis1D::new(config.m)?);
            let phi0 = match &from {
                Some(path) => snapshot_read(path)?,
                None => initial_field(&config, &basis)?,
            };
            let outcome = evolve_from(&config, &basis, &phi0)?;
            let run = slcn::experiments::TraceRun {
                tau: config.taus[0],
                records: outcome.trace.clone(),
                diverged: None,
            };
            write_trace_csv(
                create(&config.out_dir, "evolve.csv")?,
                &config,
                std::slice::from_ref(&run),
            )?;
            let snapshot = config.out_dir.join("final.chsl");
            snapshot_write(&outcome.state.phi_n, &snapshot)?;
            let last = outcome.trace.last().expect("trace has the initial record");
            let summary = EvolveSummary {
                steps: outcome.state.n,
                steady: outcome.steady,
                final_energy: last.energy,
                final_discrete_energy: last.discrete_energy,
                final_dt_norm: last.dt_norm,
                mass: last.mass,
                snapshot,
            };
            write_summary_json(&config.out_dir.join("evolve.json"), &config, &summary)?;
            println!(
                "steps={} steady={} E={} E_CN={} dt_norm={:e}",
                summary.steps,
                summary.steady,
                summary.final_energy,
                summary.final_discrete_energy,
                summary.final_dt_norm
            );
        }
        Command::Converge { common, reference_tau } => {
            let extra = ConfigOverrides {
                reference_tau,
                ..Default::default()
            };
            let config = common.resolve(ExperimentKind::Convergence, extra)?;
            std::fs::create_dir_all(&config.out_dir)?;
            let table = run_convergence_study(&config)?;
            write_convergence_csv(create(&config.out_dir, "convergence.csv")?, &config, &table)?;
            write_summary_json(&config.out_dir.join("convergence.json"), &config, &table)?;
            println!(
                "{:>8} {:>12} {:>6} {:>12} {:>6} {:>12} {:>6}",
                "tau", "H-1", "order", "L2", "order", "H1", "order"
            );
            for r in &table.rows {
                let fmt = |o: Option<f64>| o.map_or_else(String::new, |v| format!("{v:.2}"));
                println!(
                    "{:>8} {:>12.3e} {:>6} {:>12.3e} {:>6} {:>12.3e} {:>6}",
                    r.tau,
                    r.errors.h_minus1,
                    fmt(r.orders.map(|o| o.h_minus1)),
                    r.errors.l2,
                    fmt(r.orders.map(|o| o.l2)),
                    r.errors.h1,
                    fmt(r.orders.map(|o| o.h1)),
                );
            }
        }
        Command::Sweep {
            common,
            gammas,
            sweep_steps,
        } => {
            let extra = ConfigOverrides {
                gammas,
                sweep_steps,
                ..Default::default()
            };
            let config = common.resolve(ExperimentKind::StabilitySweep, extra)?;
            std::fs::create_dir_all(&config.out_dir)?;
            let sweep = run_stability_sweep(&config)?;
            write_sweep_csv(create(&config.out_dir, "sweep.csv")?, &config, &sweep)?;
            write_summary_json(&config.out_dir.join("sweep.json"), &config, &sweep)?;
            for c in &sweep.cells {
                let min = c.min_stable.map_or_else(|| "inf".to_string(), |v| v.to_string());
                println!(
                    "gamma={} tau={} min {}={} (fixed {}={})",
                    c.gamma,
                    c.tau,
                    c.ladder.as_str(),
                    min,
                    if c.ladder.as_str() == "a" { "b" } else { "a" },
                    c.fixed
                );
            }
        }
        Command::Trace { common } => {
            let config = common.resolve(ExperimentKind::EnergyTrace, ConfigOverrides::default())?;
            std::fs::create_dir_all(&config.out_dir)?;
            let runs = run_energy_trace(&config)?;
            write_trace_csv(create(&config.out_dir, "trace.csv")?, &config, &runs)?;
            let summary: Vec<TraceSummary> = runs
                .iter()
                .map(|r| TraceSummary {
                    tau: r.tau,
                    steps: r.records.len().saturating_sub(1),
                    final_energy: r.records.last().map(|x| x.energy),
                    final_discrete_energy: r.records.last().map(|x| x.discrete_energy),
                    diverged_at_step: r.diverged.map(|d| d.0),
                })
                .collect();
            write_summary_json(&config.out_dir.join("trace.json"), &config, &summary)?;
            if let Some(r) = runs.iter().find(|r| r.diverged.is_some()) {
                let (step, max_abs) = r.diverged.unwrap();
                return Err(Error::Diverged { step, max_abs });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) | Error::InvalidArgument(_) => ExitCode::from(2),
                Error::Diverged { .. } => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
