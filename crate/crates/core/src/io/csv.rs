//! Plain CSV output: comma separated, LF line endings, no quoting. Floats
//! are written with 17 significant digits so they parse back bit-exactly.

use std::fs;
use std::io::{self, Write};
use std::path::Path;

use crate::dynamics::Trajectory;
use crate::experiments::{LzRow, SpectrumRow, SweepRow};
use crate::observables::purity_norm;

/// A row type with a fixed header.
pub trait CsvRecord {
    const HEADER: &'static [&'static str];

    fn write_fields(&self, out: &mut Vec<String>);
}

/// Scientific notation with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_csv_string<R: CsvRecord>(rows: &[R]) -> String {
    let mut out = String::new();
    out.push_str(&R::HEADER.join(","));
    out.push('\n');
    let mut fields = Vec::with_capacity(R::HEADER.len());
    for row in rows {
        fields.clear();
        row.write_fields(&mut fields);
        debug_assert_eq!(fields.len(), R::HEADER.len());
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv<R: CsvRecord>(rows: &[R], path: &Path) -> io::Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(to_csv_string(rows).as_bytes())?;
    file.flush()
}

impl CsvRecord for SweepRow {
    const HEADER: &'static [&'static str] = &[
        "kind",
        "kappa",
        "tau",
        "p_excited",
        "energy_final",
        "energy_normalized",
        "coherence",
        "skew_information",
        "p_lz_formula",
        "purity_drift",
        "status",
    ];

    fn write_fields(&self, out: &mut Vec<String>) {
        out.push(self.kind.to_string());
        out.extend(
            [
                self.kappa,
                self.tau,
                self.p_excited,
                self.energy_final,
                self.energy_normalized,
                self.coherence,
                self.skew_information,
                self.p_lz_formula,
                self.purity_drift,
            ]
            .map(format_float),
        );
        out.push(self.status.to_string());
    }
}

impl CsvRecord for SpectrumRow {
    const HEADER: &'static [&'static str] = &[
        "delta",
        "branch",
        "x",
        "z",
        "energy",
        "linear_ref_minus",
        "linear_ref_plus",
    ];

    fn write_fields(&self, out: &mut Vec<String>) {
        out.push(format_float(self.delta));
        out.push(self.branch.to_string());
        out.extend(
            [self.x, self.z, self.energy, self.linear_ref_minus, self.linear_ref_plus].map(format_float),
        );
    }
}

impl CsvRecord for LzRow {
    const HEADER: &'static [&'static str] = &["tau", "p_numeric", "p_formula", "abs_diff"];

    fn write_fields(&self, out: &mut Vec<String>) {
        out.extend([self.tau, self.p_numeric, self.p_formula, self.abs_diff].map(format_float));
    }
}

/// One recorded sample of a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub delta: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub purity: f64,
}

impl CsvRecord for TrajectoryRow {
    const HEADER: &'static [&'static str] = &["t", "delta", "x", "y", "z", "purity"];

    fn write_fields(&self, out: &mut Vec<String>) {
        out.extend([self.t, self.delta, self.x, self.y, self.z, self.purity].map(format_float));
    }
}

/// Trajectory samples with the ramp detuning at each time. Runs without a
/// ramp report Δ = NaN.
pub fn trajectory_rows(traj: &Trajectory) -> Vec<TrajectoryRow> {
    traj.times
        .iter()
        .zip(&traj.states)
        .map(|(&t, s)| TrajectoryRow {
            t,
            delta: traj
                .protocol
                .map(|p| p.alpha() * t / p.tau())
                .unwrap_or(f64::NAN),
            x: s.x(),
            y: s.y(),
            z: s.z(),
            purity: purity_norm(s),
        })
        .collect()
}
