//! CSV tables and JSON summaries. Floats use Rust's shortest round-trip
//! formatting; orders are rounded to two decimals.

use std::path::Path;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::studies::{ConvergenceTable, SweepResult, TraceRun};
use crate::error::{Error, Result};

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Io(std::io::Error::other(format!("{other:?}"))),
    }
}

struct Table<W: std::io::Write> {
    writer: csv::Writer<W>,
    provenance: Vec<String>,
}

impl<W: std::io::Write> Table<W> {
    fn new(inner: W, config: &ExperimentConfig, columns: &[&str]) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(inner);
        let prov = config.provenance();
        let header: Vec<&str> = columns.iter().copied().chain(prov.iter().map(|(k, _)| *k)).collect();
        writer.write_record(&header).map_err(csv_error)?;
        Ok(Self {
            writer,
            provenance: prov.into_iter().map(|(_, v)| v).collect(),
        })
    }

    fn row(&mut self, fields: &[String]) -> Result<()> {
        self.writer
            .write_record(fields.iter().chain(&self.provenance))
            .map_err(csv_error)
    }

    fn finish(mut self) -> Result<()> {
        self.writer.flush()?;
        Ok(())
    }
}

fn order(v: Option<f64>) -> String {
    v.map(|o| format!("{o:.2}")).unwrap_or_default()
}

pub fn write_convergence_csv<W: std::io::Write>(
    out: W,
    config: &ExperimentConfig,
    table: &ConvergenceTable,
) -> Result<()> {
    let columns = [
        "tau",
        "steps",
        "h_minus1",
        "order_h_minus1",
        "l2",
        "order_l2",
        "h1",
        "order_h1",
        "mass_drift",
        "reference_tau",
        "gamma",
        "a",
        "b",
    ];
    let mut t = Table::new(out, config, &columns)?;
    for r in &table.rows {
        let o = r.orders;
        t.row(&[
            r.tau.to_string(),
            r.steps.to_string(),
            r.errors.h_minus1.to_string(),
            order(o.map(|o| o.h_minus1)),
            r.errors.l2.to_string(),
            order(o.map(|o| o.l2)),
            r.errors.h1.to_string(),
            order(o.map(|o| o.h1)),
            r.mass_drift.to_string(),
            table.reference_tau.to_string(),
            config.gamma.to_string(),
            config.a.to_string(),
            config.b.to_string(),
        ])?;
    }
    t.finish()
}

pub fn write_sweep_csv<W: std::io::Write>(out: W, config: &ExperimentConfig, sweep: &SweepResult) -> Result<()> {
    let columns = ["gamma", "tau", "minimized", "fixed", "min_stable", "sweep_steps"];
    let mut t = Table::new(out, config, &columns)?;
    for c in &sweep.cells {
        t.row(&[
            c.gamma.to_string(),
            c.tau.to_string(),
            c.ladder.as_str().to_string(),
            c.fixed.to_string(),
            c.min_stable.map_or_else(|| "inf".to_string(), |v| v.to_string()),
            config.sweep_steps.to_string(),
        ])?;
    }
    t.finish()
}

pub fn write_trace_csv<W: std::io::Write>(out: W, config: &ExperimentConfig, runs: &[TraceRun]) -> Result<()> {
    let columns = [
        "tau",
        "t",
        "energy",
        "discrete_energy",
        "mass",
        "dt_norm",
        "status",
        "gamma",
        "a",
        "b",
    ];
    let mut t = Table::new(out, config, &columns)?;
    let tail = [config.gamma.to_string(), config.a.to_string(), config.b.to_string()];
    for run in runs {
        for r in &run.records {
            let mut row = vec![
                run.tau.to_string(),
                r.t.to_string(),
                r.energy.to_string(),
                r.discrete_energy.to_string(),
                r.mass.to_string(),
                r.dt_norm.to_string(),
                "ok".to_string(),
            ];
            row.extend(tail.iter().cloned());
            t.row(&row)?;
        }
        if let Some((step, max_abs)) = run.diverged {
            let mut row = vec![
                run.tau.to_string(),
                (step as f64 * run.tau).to_string(),
                String::new(),
                String::new(),
                String::new(),
                max_abs.to_string(),
                "diverged".to_string(),
            ];
            row.extend(tail.iter().cloned());
            t.row(&row)?;
        }
    }
    t.finish()
}

#[derive(Serialize)]
struct Summary<'a, T: Serialize> {
    config: &'a ExperimentConfig,
    result: &'a T,
}

/// Writes `{"config": ..., "result": ...}` as pretty JSON.
pub fn write_summary_json<T: Serialize>(path: &Path, config: &ExperimentConfig, result: &T) -> Result<()> {
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(file, &Summary { config, result })?;
    Ok(())
}
