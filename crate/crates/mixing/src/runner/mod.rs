//! Dispatch of a validated configuration to the owning module.

mod discrete;
mod euler;
mod mc;
mod spectrum;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use mixing_core::lattice::LatticeBox;
use mixing_core::spectrum::{SpectrumState, TruncationPolicy};
use mixing_core::theta::ThetaCoefficients;

use crate::config::{Command, InitialConfig, RunConfig, Truncation};
use crate::io::{OutputDir, INCOMPLETE, SUMMARY, TIMING};
use crate::report::{Criterion, RunReport, Status};

/// Environment variable naming the output root.
pub const OUT_ENV: &str = "MIXING_OUT";

/// `explicit`, else `config.output`, else `$MIXING_OUT/<command>`, else
/// `./mixing-out/<command>`.
pub fn output_dir(cfg: &RunConfig, explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(p) = &cfg.output {
        return PathBuf::from(p);
    }
    let root = std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("mixing-out"));
    root.join(cfg.command.name())
}

/// Runs `cfg`, writing artifacts under `out`. The summary is written last;
/// a module error leaves `incomplete.json` instead.
pub fn run_command(cfg: &RunConfig, warnings: Vec<String>, out: &Path) -> Result<RunReport> {
    let dir = OutputDir::prepare(out)?;
    let mut report = RunReport::new(cfg.clone(), warnings);
    let start = Instant::now();
    let outcome = match cfg.command {
        Command::Spectrum => spectrum::run(cfg, &dir, &mut report, false),
        Command::Heat => spectrum::run(cfg, &dir, &mut report, true),
        Command::TransportMc => mc::run(cfg, &dir, &mut report, false),
        Command::HeatMc => mc::run(cfg, &dir, &mut report, true),
        Command::Euler => euler::run(cfg, &dir, &mut report),
        Command::Poincare => discrete::run_poincare(cfg, &dir, &mut report),
        Command::Orbits => discrete::run_orbits(cfg, &dir, &mut report),
        Command::Report => run_report(cfg, &mut report),
    };
    let seconds = start.elapsed().as_secs_f64();
    if let Err(e) = outcome {
        let msg = format!("{e:#}");
        dir.write_json(
            INCOMPLETE,
            &serde_json::json!({ "command": cfg.command, "error": msg, "artifacts": report.artifacts }),
        )?;
        return Err(e.context(format!("{} run failed; partial outputs in {}", cfg.command.name(), out.display())));
    }
    report.finish();
    dir.write_json(TIMING, &serde_json::json!({ "wall_seconds": seconds }))?;
    dir.write_json(SUMMARY, &report)?;
    Ok(report)
}

fn run_report(cfg: &RunConfig, report: &mut RunReport) -> Result<()> {
    let table = crate::report::compare_bounds(&cfg.inputs)?;
    for row in &table.rows {
        let mut c = row.criterion.clone();
        c.name = format!("{} / {}", row.command.name(), c.name);
        report.push(c);
    }
    if table.rows.is_empty() {
        report.push(Criterion {
            status: Status::Inconclusive,
            ..Criterion::info("consolidated criteria", 0.0, "no criteria in the inputs")
        });
    }
    report.result("gated_samples_used", table.gated_used);
    report.result("gated_samples_excluded", table.gated_excluded);
    Ok(())
}

pub(crate) fn kappa(cfg: &RunConfig) -> Result<f64> {
    cfg.kappa.value().context("κ must be a number for this command")
}

pub(crate) fn truncation(cfg: &RunConfig, theta: &ThetaCoefficients) -> TruncationPolicy {
    let margin = cfg.boundary_margin.unwrap_or_else(|| theta.support_sup_norm());
    match cfg.truncation {
        Truncation::Conservative => TruncationPolicy::conservative(margin),
        Truncation::Absorbing => TruncationPolicy::absorbing(margin),
    }
}

pub(crate) fn initial_spectrum(cfg: &RunConfig, lattice: &LatticeBox) -> Result<SpectrumState> {
    Ok(match &cfg.initial {
        InitialConfig::Shell { max_norm_sq, mass } => SpectrumState::shell(lattice, *max_norm_sq, *mass)?,
        InitialConfig::Delta { k, mass } => SpectrumState::delta(lattice, k, *mass)?,
    })
}

/// A name fragment for a real parameter, e.g. `p=1.5`.
pub(crate) fn tag(name: &str, v: f64) -> String {
    format!("{name}={}", crate::io::fmt_f64(v))
}
