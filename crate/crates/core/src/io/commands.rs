//! Execution of the four `nlz` subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::{CommandKind, RunConfig};
use super::csv::{trajectory_rows, write_csv, CsvRecord};
use super::svg::{lz_chart, render_grid, spectrum_chart, sweep_charts, trajectory_chart, write_svg};
use super::CliError;
use crate::dynamics::{initial_ground_state, integrate};
use crate::experiments::{run_lz_check, run_spectrum, run_tau_sweep, ExperimentError, SweepTable};
use crate::model::{ModelParams, NonlinearitySpec, RampProtocol};
use crate::observables::{lz_formula, ObservableRecord};

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        match e {
            ExperimentError::Config(_) | ExperimentError::Model(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

/// Runs a validated configuration and returns the text summary for stdout.
///
/// Output goes to `<output_dir>/<command>.csv` (and `.svg` when requested).
/// A sweep with failed cells still writes its table before reporting the
/// failure.
pub fn run(config: &RunConfig) -> Result<String, CliError> {
    fs::create_dir_all(&config.output_dir).map_err(|source| CliError::Io {
        path: config.output_dir.clone(),
        source,
    })?;
    match config.command {
        CommandKind::Spectrum => spectrum(config),
        CommandKind::Evolve => evolve(config),
        CommandKind::Sweep => sweep(config),
        CommandKind::LzCheck => lz_check(config),
    }
}

fn output_path(config: &RunConfig, ext: &str) -> PathBuf {
    config.output_dir.join(format!("{}.{ext}", config.command.name()))
}

fn save_csv<R: CsvRecord>(rows: &[R], path: &Path) -> Result<(), CliError> {
    write_csv(rows, path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn save_svg(config: &RunConfig, svg: impl FnOnce() -> String, out: &mut String) -> Result<(), CliError> {
    if !config.emit_svg {
        return Ok(());
    }
    let path = output_path(config, "svg");
    write_svg(&svg(), &path).map_err(|source| CliError::Io {
        path: path.clone(),
        source,
    })?;
    let _ = writeln!(out, "wrote {}", path.display());
    Ok(())
}

fn params(config: &RunConfig) -> Result<ModelParams, CliError> {
    let m = &config.model;
    NonlinearitySpec::new(m.kind, m.kappa)
        .and_then(|nl| ModelParams::new(m.coupling, nl))
        .map_err(|e| CliError::Validation(e.to_string()))
}

fn spectrum(config: &RunConfig) -> Result<String, CliError> {
    let table = run_spectrum(&config.spectrum_config(), &config.work_pool())?;
    let path = output_path(config, "csv");
    save_csv(&table.rows, &path)?;

    let mut out = String::new();
    let m = &config.model;
    let _ = writeln!(
        out,
        "spectrum: kind={} kappa={} J={} delta=[{}, {}] points={}",
        m.kind, m.kappa, m.coupling, config.spectrum.delta_min, config.spectrum.delta_max, config.spectrum.points
    );
    let _ = writeln!(out, "stationary points: {}", table.rows.len());
    match table.loop_window() {
        Some((lo, hi)) => {
            let _ = writeln!(out, "loop branch present for delta in [{lo}, {hi}]");
        }
        None => {
            let _ = writeln!(out, "no loop branch in range");
        }
    }
    let _ = writeln!(out, "wrote {}", path.display());
    save_svg(config, || spectrum_chart(&table).render(), &mut out)?;
    Ok(out)
}

fn evolve(config: &RunConfig) -> Result<String, CliError> {
    let params = params(config)?;
    let protocol = RampProtocol::new(config.protocol.alpha, config.protocol.tau)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let initial = initial_ground_state(&protocol, &params).map_err(|e| CliError::Numerical(e.to_string()))?;
    let traj = integrate(&initial, &protocol, &params, &config.integrator)
        .map_err(|e| CliError::Numerical(e.to_string()))?;
    let rows = trajectory_rows(&traj);
    let path = output_path(config, "csv");
    save_csv(&rows, &path)?;

    let last = traj.final_state();
    let obs = ObservableRecord::evaluate(last, protocol.final_delta(), params.coupling());
    let mut out = String::new();
    let m = &config.model;
    let _ = writeln!(
        out,
        "evolve: kind={} kappa={} J={} alpha={} tau={}",
        m.kind, m.kappa, m.coupling, protocol.alpha(), protocol.tau()
    );
    let _ = writeln!(out, "samples={} steps={} rejected={}", traj.len(), traj.stats.accepted_steps, traj.stats.rejected_steps);
    let _ = writeln!(out, "P = {:.10}", obs.p_excited);
    let _ = writeln!(out, "P_LZ(formula) = {:.10}", lz_formula(params.coupling(), protocol.tau(), protocol.alpha()));
    let _ = writeln!(out, "E_final = {:.10}", obs.energy);
    let _ = writeln!(out, "C_rel_ent = {:.10}", obs.coherence_rel_entropy);
    let _ = writeln!(out, "Y_skew = {:.10}", obs.skew_information);
    let _ = writeln!(out, "max purity drift = {:.3e}", traj.stats.max_purity_drift);
    let _ = writeln!(out, "wrote {}", path.display());
    save_svg(config, || trajectory_chart(&rows).render(), &mut out)?;
    Ok(out)
}

fn sweep_summary(table: &SweepTable, out: &mut String) {
    let _ = writeln!(out, "E_ground(kappa=0, tau_max) = {:.10}", table.energy_ground);
    for kappa in table.kappas() {
        let first_adiabatic = table
            .rows_for(kappa)
            .find(|r| r.p_excited < 0.01)
            .map(|r| format!("{:.6}", r.tau))
            .unwrap_or_else(|| "none".into());
        let drift = table
            .rows_for(kappa)
            .map(|r| r.purity_drift)
            .fold(0.0f64, f64::max);
        let _ = writeln!(
            out,
            "kappa={kappa}: first tau with P<0.01 = {first_adiabatic}, max purity drift = {drift:.3e}"
        );
    }
}

fn sweep(config: &RunConfig) -> Result<String, CliError> {
    let cfg = config.sweep_config();
    let path = output_path(config, "csv");
    let mut out = String::new();
    let _ = writeln!(
        out,
        "sweep: kind={} J={} alpha={} kappas={:?} taus={} in [{}, {}]",
        cfg.kind,
        cfg.coupling,
        cfg.alpha,
        cfg.kappas,
        cfg.taus.len(),
        config.sweep.tau_min,
        config.sweep.tau_max
    );
    match run_tau_sweep(&cfg, &config.work_pool()) {
        Ok(table) => {
            save_csv(&table.rows, &path)?;
            sweep_summary(&table, &mut out);
            let _ = writeln!(out, "wrote {}", path.display());
            save_svg(config, || render_grid(&sweep_charts(&table), 2), &mut out)?;
            Ok(out)
        }
        Err(failure) => {
            save_csv(&failure.table.rows, &path)?;
            save_svg(config, || render_grid(&sweep_charts(&failure.table), 2), &mut out)?;
            let failed = failure.table.failed().count();
            Err(CliError::Numerical(format!(
                "{failed} sweep cell(s) failed, first at kappa = {}, tau = {}: {} (partial table written to {})",
                failure.kappa,
                failure.tau,
                failure.source,
                path.display()
            )))
        }
    }
}

fn lz_check(config: &RunConfig) -> Result<String, CliError> {
    let cfg = config.sweep_config();
    let report = run_lz_check(&cfg, &config.work_pool())?;
    let path = output_path(config, "csv");
    save_csv(&report.rows, &path)?;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "lz-check: J={} alpha={} taus={} in [{}, {}]",
        cfg.coupling,
        cfg.alpha,
        cfg.taus.len(),
        config.sweep.tau_min,
        config.sweep.tau_max
    );
    match report.max_abs_diff {
        Some(d) => {
            let _ = writeln!(out, "max |P - P_LZ| over tau in [1, 500] = {d:.3e}");
        }
        None => {
            let _ = writeln!(out, "no tau in [1, 500]");
        }
    }
    let _ = writeln!(out, "wrote {}", path.display());
    save_svg(config, || lz_chart(&report).render(), &mut out)?;
    Ok(out)
}
