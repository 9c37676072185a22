//! Batch experiments: τ-sweeps over several nonlinearity strengths, spectrum
//! sweeps and the linear-model check against the Landau-Zener formula.
//!
//! Every (κ, τ) cell is an independent integration. Cells run on a rayon
//! pool and results are collected in input order, so the output does not
//! depend on the pool width.

use std::fmt;

use rayon::prelude::*;
use rayon::ThreadPoolBuilder;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{initial_ground_state, integrate, IntegrationError, IntegratorOptions, Recording};
use crate::model::{linear_energies, ModelError, ModelParams, NonlinearityKind, NonlinearitySpec, RampProtocol};
use crate::observables::{lz_formula, ObservableRecord};
use crate::stationary::{spectrum_sweep, Branch, StationaryError};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Stationary(#[from] StationaryError),
    #[error("integration failed for kappa = {kappa}, tau = {tau}: {source}")]
    Integration {
        kappa: f64,
        tau: f64,
        source: IntegrationError,
    },
    #[error("could not build worker pool: {0}")]
    Pool(String),
}

/// Width of the worker pool. `None` uses rayon's global pool.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WorkPool {
    pub threads: Option<usize>,
}

impl WorkPool {
    pub fn with_threads(n: usize) -> Self {
        Self { threads: Some(n.max(1)) }
    }

    pub fn install<R, F>(&self, f: F) -> Result<R, ExperimentError>
    where
        F: FnOnce() -> R + Send,
        R: Send,
    {
        match self.threads {
            None => Ok(f()),
            Some(n) => {
                let pool = ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| ExperimentError::Pool(e.to_string()))?;
                Ok(pool.install(f))
            }
        }
    }
}

/// `n` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    let last = (n - 1) as f64;
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => 10f64.powf(a + (b - a) * i as f64 / last),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(rename = "J")]
    pub coupling: f64,
    pub alpha: f64,
    pub kind: NonlinearityKind,
    pub kappas: Vec<f64>,
    pub taus: Vec<f64>,
    pub integrator: IntegratorOptions,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            coupling: 1.0,
            alpha: 100.0,
            kind: NonlinearityKind::GrossPitaevskii,
            kappas: vec![0.0, 1.0, 2.0, 4.0, 8.0],
            taus: log_spaced(0.1, 1000.0, 61),
            integrator: IntegratorOptions::default(),
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if !(self.coupling > 0.0 && self.coupling.is_finite()) {
            return bad(format!("J must be positive, got {}", self.coupling));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {}", self.alpha));
        }
        if self.kappas.is_empty() {
            return bad("kappa list is empty".into());
        }
        if let Some(k) = self.kappas.iter().find(|k| !k.is_finite()) {
            return bad(format!("kappa must be finite, got {k}"));
        }
        if self.taus.is_empty() {
            return bad("tau list is empty".into());
        }
        if let Some(t) = self.taus.iter().find(|t| !(**t > 0.0 && t.is_finite())) {
            return bad(format!("tau must be positive, got {t}"));
        }
        if self.taus.windows(2).any(|w| w[1] <= w[0]) {
            return bad("taus must be strictly increasing".into());
        }
        self.integrator
            .validate()
            .map_err(|e| ExperimentError::Config(e.to_string()))
    }

    fn params(&self, kappa: f64) -> Result<ModelParams, ModelError> {
        ModelParams::new(self.coupling, NonlinearitySpec::new(self.kind, kappa)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Failed,
}

impl fmt::Display for CellStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CellStatus::Ok => "ok",
            CellStatus::Failed => "failed",
        })
    }
}

/// Observables at the end of one ramp.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub kind: NonlinearityKind,
    pub kappa: f64,
    pub tau: f64,
    pub p_excited: f64,
    pub energy_final: f64,
    pub energy_normalized: f64,
    pub coherence: f64,
    pub skew_information: f64,
    pub p_lz_formula: f64,
    pub purity_drift: f64,
    pub status: CellStatus,
}

/// Rows ordered by (κ index, τ index).
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Final energy of the linear run at the largest τ.
    pub energy_ground: f64,
}

impl SweepTable {
    pub fn rows_for(&self, kappa: f64) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.kappa == kappa)
    }

    pub fn kappas(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.kappa) {
                out.push(r.kappa);
            }
        }
        out
    }

    pub fn failed(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.status == CellStatus::Failed)
    }
}

/// A sweep with at least one failed cell. The table still holds every row,
/// with failed cells marked.
#[derive(Debug, Error)]
#[error("sweep cell kappa = {kappa}, tau = {tau} failed: {source}")]
pub struct SweepFailure {
    pub table: SweepTable,
    pub kappa: f64,
    pub tau: f64,
    pub source: ExperimentError,
}

struct CellResult {
    record: ObservableRecord,
    drift: f64,
}

fn run_cell(cfg: &SweepConfig, kappa: f64, tau: f64) -> Result<CellResult, ExperimentError> {
    let wrap = |source| ExperimentError::Integration { kappa, tau, source };
    let params = cfg.params(kappa)?;
    let protocol = RampProtocol::new(cfg.alpha, tau)?;
    let initial = initial_ground_state(&protocol, &params).map_err(wrap)?;
    // Only the final state is needed; purity is still checked on every step.
    let opts = cfg.integrator.with_record(Recording::Samples(2));
    let traj = integrate(&initial, &protocol, &params, &opts).map_err(wrap)?;
    Ok(CellResult {
        record: ObservableRecord::evaluate(traj.final_state(), protocol.final_delta(), cfg.coupling),
        drift: traj.stats.max_purity_drift,
    })
}

/// Final-time observables for every (κ, τ) in the configuration.
///
/// Energies are normalized by the final energy of the linear (κ = 0) run at
/// the largest τ, which is computed separately when κ = 0 is not in the grid.
pub fn run_tau_sweep(cfg: &SweepConfig, pool: &WorkPool) -> Result<SweepTable, SweepFailure> {
    if let Err(source) = cfg.validate() {
        return Err(SweepFailure {
            table: SweepTable {
                rows: Vec::new(),
                energy_ground: f64::NAN,
            },
            kappa: f64::NAN,
            tau: f64::NAN,
            source,
        });
    }
    let cells: Vec<(f64, f64)> = cfg
        .kappas
        .iter()
        .flat_map(|&k| cfg.taus.iter().map(move |&t| (k, t)))
        .collect();
    let tau_max = *cfg.taus.last().expect("validated non-empty");
    let need_reference = !cfg.kappas.contains(&0.0);

    let outcome = pool.install(|| {
        let results: Vec<Result<CellResult, ExperimentError>> =
            cells.par_iter().map(|&(k, t)| run_cell(cfg, k, t)).collect();
        let reference = need_reference.then(|| run_cell(cfg, 0.0, tau_max));
        (results, reference)
    });
    let (results, reference) = match outcome {
        Ok(v) => v,
        Err(source) => {
            return Err(SweepFailure {
                table: SweepTable {
                    rows: Vec::new(),
                    energy_ground: f64::NAN,
                },
                kappa: f64::NAN,
                tau: f64::NAN,
                source,
            })
        }
    };

    let energy_ground = match &reference {
        Some(Ok(r)) => r.record.energy,
        Some(Err(_)) => f64::NAN,
        None => {
            let idx = cells
                .iter()
                .position(|&(k, t)| k == 0.0 && t == tau_max)
                .expect("kappa = 0 is in the grid");
            results[idx].as_ref().map(|r| r.record.energy).unwrap_or(f64::NAN)
        }
    };

    let mut first_failure: Option<(f64, f64, ExperimentError)> = None;
    let mut rows = Vec::with_capacity(cells.len());
    for (&(kappa, tau), result) in cells.iter().zip(results) {
        let p_lz_formula = lz_formula(cfg.coupling, tau, cfg.alpha);
        let row = match result {
            Ok(cell) => SweepRow {
                kind: cfg.kind,
                kappa,
                tau,
                p_excited: cell.record.p_excited,
                energy_final: cell.record.energy,
                energy_normalized: cell.record.energy / energy_ground,
                coherence: cell.record.coherence_rel_entropy,
                skew_information: cell.record.skew_information,
                p_lz_formula,
                purity_drift: cell.drift,
                status: CellStatus::Ok,
            },
            Err(err) => {
                if first_failure.is_none() {
                    first_failure = Some((kappa, tau, err));
                }
                SweepRow {
                    kind: cfg.kind,
                    kappa,
                    tau,
                    p_excited: f64::NAN,
                    energy_final: f64::NAN,
                    energy_normalized: f64::NAN,
                    coherence: f64::NAN,
                    skew_information: f64::NAN,
                    p_lz_formula,
                    purity_drift: f64::NAN,
                    status: CellStatus::Failed,
                }
            }
        };
        rows.push(row);
    }

    let table = SweepTable { rows, energy_ground };
    if let Some((kappa, tau, source)) = first_failure {
        return Err(SweepFailure {
            table,
            kappa,
            tau,
            source,
        });
    }
    if let Some(Err(source)) = reference {
        return Err(SweepFailure {
            table,
            kappa: 0.0,
            tau: tau_max,
            source,
        });
    }
    Ok(table)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LzRow {
    pub tau: f64,
    pub p_numeric: f64,
    pub p_formula: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LzCheckReport {
    pub rows: Vec<LzRow>,
    /// Largest |p_numeric − p_formula| over rows with τ ∈ [1, 500], if any.
    pub max_abs_diff: Option<f64>,
}

/// Linear model against the Landau-Zener formula. κ is forced to 0
/// whatever the configuration lists.
pub fn run_lz_check(cfg: &SweepConfig, pool: &WorkPool) -> Result<LzCheckReport, ExperimentError> {
    let cfg = SweepConfig {
        kind: NonlinearityKind::Linear,
        kappas: vec![0.0],
        ..cfg.clone()
    };
    cfg.validate()?;
    let results = pool.install(|| {
        cfg.taus
            .par_iter()
            .map(|&tau| run_cell(&cfg, 0.0, tau).map(|c| (tau, c)))
            .collect::<Result<Vec<_>, _>>()
    })??;
    let rows: Vec<LzRow> = results
        .into_iter()
        .map(|(tau, cell)| {
            let p_formula = lz_formula(cfg.coupling, tau, cfg.alpha);
            LzRow {
                tau,
                p_numeric: cell.record.p_excited,
                p_formula,
                abs_diff: (cell.record.p_excited - p_formula).abs(),
            }
        })
        .collect();
    let max_abs_diff = rows
        .iter()
        .filter(|r| (1.0..=500.0).contains(&r.tau))
        .map(|r| r.abs_diff)
        .reduce(f64::max);
    Ok(LzCheckReport { rows, max_abs_diff })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig {
    #[serde(rename = "J")]
    pub coupling: f64,
    pub kind: NonlinearityKind,
    pub kappa: f64,
    pub delta_min: f64,
    pub delta_max: f64,
    pub points: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            coupling: 1.0,
            kind: NonlinearityKind::GrossPitaevskii,
            kappa: 4.0,
            delta_min: -4.0,
            delta_max: 4.0,
            points: 801,
        }
    }
}

/// One stationary point of the spectrum table, with the linear reference
/// energies at the same detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumRow {
    pub delta: f64,
    pub branch: Branch,
    pub x: f64,
    pub z: f64,
    pub energy: f64,
    pub linear_ref_minus: f64,
    pub linear_ref_plus: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumTable {
    pub rows: Vec<SpectrumRow>,
    /// Number of stationary points per detuning column.
    pub root_counts: Vec<(f64, usize)>,
}

impl SpectrumTable {
    /// Detuning interval spanned by columns with more than two points.
    pub fn loop_window(&self) -> Option<(f64, f64)> {
        let mut inside = self.root_counts.iter().filter(|(_, n)| *n > 2).map(|(d, _)| *d);
        let first = inside.next()?;
        let last = inside.next_back().unwrap_or(first);
        Some((first, last))
    }
}

pub fn run_spectrum(cfg: &SpectrumConfig, pool: &WorkPool) -> Result<SpectrumTable, ExperimentError> {
    let params = ModelParams::new(cfg.coupling, NonlinearitySpec::new(cfg.kind, cfg.kappa)?)?;
    let spectrum = pool.install(|| spectrum_sweep(cfg.delta_min, cfg.delta_max, cfg.points, &params))??;
    let mut rows = Vec::new();
    let mut root_counts = Vec::with_capacity(spectrum.columns.len());
    for column in &spectrum.columns {
        let (minus, plus) = linear_energies(column.delta, cfg.coupling);
        root_counts.push((column.delta, column.len()));
        rows.extend(column.points.iter().map(|p| SpectrumRow {
            delta: column.delta,
            branch: p.branch,
            x: p.x,
            z: p.z,
            energy: p.energy,
            linear_ref_minus: minus,
            linear_ref_plus: plus,
        }));
    }
    Ok(SpectrumTable { rows, root_counts })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid() {
        let g = log_spaced(0.1, 1000.0, 61);
        assert_eq!(g.len(), 61);
        assert_eq!(g[0], 0.1);
        assert_eq!(g[60], 1000.0);
        assert!((g[15] - 1.0).abs() < 1e-12);
        assert!((g[45] - 100.0).abs() < 1e-10);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn config_validation() {
        assert!(SweepConfig::default().validate().is_ok());
        let mut cfg = SweepConfig {
            taus: vec![1.0, 1.0],
            ..SweepConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg.taus = vec![];
        assert!(cfg.validate().is_err());
        let cfg = SweepConfig {
            kappas: vec![],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = SweepConfig {
            coupling: 0.0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn small_sweep_layout() {
        let cfg = SweepConfig {
            kappas: vec![0.0, 4.0],
            taus: vec![0.5, 1.0, 2.0],
            ..Default::default()
        };
        let table = run_tau_sweep(&cfg, &WorkPool::with_threads(2)).unwrap();
        assert_eq!(table.rows.len(), 6);
        let order: Vec<(f64, f64)> = table.rows.iter().map(|r| (r.kappa, r.tau)).collect();
        assert_eq!(
            order,
            vec![(0.0, 0.5), (0.0, 1.0), (0.0, 2.0), (4.0, 0.5), (4.0, 1.0), (4.0, 2.0)]
        );
        assert!(table.rows.iter().all(|r| r.status == CellStatus::Ok));
        assert_eq!(table.energy_ground, table.rows[2].energy_final);
    }

    #[test]
    fn reference_run_when_linear_case_missing() {
        let cfg = SweepConfig {
            kappas: vec![2.0],
            taus: vec![1.0, 3.0],
            ..Default::default()
        };
        let table = run_tau_sweep(&cfg, &WorkPool::default()).unwrap();
        let with_zero = run_tau_sweep(
            &SweepConfig {
                kappas: vec![0.0],
                ..cfg.clone()
            },
            &WorkPool::default(),
        )
        .unwrap();
        assert_eq!(table.energy_ground, with_zero.rows[1].energy_final);
    }

    #[test]
    fn failing_cells_are_marked_not_dropped() {
        let cfg = SweepConfig {
            kappas: vec![0.0, 1.0],
            taus: vec![0.01, 50.0],
            integrator: IntegratorOptions {
                max_steps: 500,
                ..Default::default()
            },
            ..Default::default()
        };
        let failure = run_tau_sweep(&cfg, &WorkPool::default()).unwrap_err();
        assert_eq!(failure.table.rows.len(), 4);
        assert_eq!((failure.kappa, failure.tau), (0.0, 50.0));
        let statuses: Vec<CellStatus> = failure.table.rows.iter().map(|r| r.status).collect();
        assert_eq!(
            statuses,
            vec![CellStatus::Ok, CellStatus::Failed, CellStatus::Ok, CellStatus::Failed]
        );
        assert!(failure.table.rows[1].p_excited.is_nan());
    }

    #[test]
    fn lz_check_forces_linear_model() {
        let cfg = SweepConfig {
            kind: NonlinearityKind::GrossPitaevskii,
            kappas: vec![8.0],
            taus: vec![0.001, 10.0],
            ..Default::default()
        };
        let report = run_lz_check(&cfg, &WorkPool::default()).unwrap();
        assert_eq!(report.rows.len(), 2);
        let head = report.rows[0];
        assert!(head.p_numeric > 0.999 && head.p_formula > 0.999);
        let r = report.rows[1];
        assert!((r.p_formula - 0.730403).abs() < 1e-6);
        assert!(r.abs_diff <= 0.02, "{r:?}");
        assert_eq!(report.max_abs_diff, Some(r.abs_diff));
    }

    #[test]
    fn linear_spectrum_table() {
        let cfg = SpectrumConfig {
            kind: NonlinearityKind::Linear,
            kappa: 0.0,
            points: 11,
            ..Default::default()
        };
        let table = run_spectrum(&cfg, &WorkPool::default()).unwrap();
        assert_eq!(table.rows.len(), 22);
        assert_eq!(table.loop_window(), None);
        for r in &table.rows {
            let expected = match r.branch {
                Branch::Ground => r.linear_ref_minus,
                _ => r.linear_ref_plus,
            };
            assert!((r.energy - expected).abs() < 1e-9);
        }
    }
}
