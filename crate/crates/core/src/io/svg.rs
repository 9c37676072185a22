//! Minimal static SVG line/scatter charts for sweep and spectrum tables.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::experiments::{LzCheckReport, SpectrumTable, SweepTable};
use crate::io::csv::TrajectoryRow;
use crate::stationary::Branch;

const PANEL_WIDTH: f64 = 520.0;
const PANEL_HEIGHT: f64 = 380.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 130.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 52.0;

const PALETTE: [&str; 8] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#9467bd", "#8c564b", "#e377c2", "#17becf", "#bcbd22",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Line,
    Dashed,
    Markers,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub color: String,
    pub style: Style,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>, color: &str, style: Style) -> Self {
        Self {
            label: label.into(),
            points,
            color: color.to_string(),
            style,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x_scale: Scale,
    pub series: Vec<Series>,
}

struct Axis {
    lo: f64,
    hi: f64,
    scale: Scale,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, scale: Scale) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values.filter(|v| v.is_finite() && (scale == Scale::Linear || *v > 0.0)) {
            let v = if scale == Scale::Log { v.log10() } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            let pad = if lo.abs() > 1e-12 { 0.1 * lo.abs() } else { 1.0 };
            lo -= pad;
            hi += pad;
        } else if scale == Scale::Linear {
            let pad = 0.04 * (hi - lo);
            lo -= pad;
            hi += pad;
        }
        Self { lo, hi, scale }
    }

    /// Fraction along the axis, or None for values a log axis cannot show.
    fn frac(&self, v: f64) -> Option<f64> {
        if !v.is_finite() {
            return None;
        }
        let v = match self.scale {
            Scale::Linear => v,
            Scale::Log if v > 0.0 => v.log10(),
            Scale::Log => return None,
        };
        Some((v - self.lo) / (self.hi - self.lo))
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        match self.scale {
            Scale::Log => {
                let mut out = Vec::new();
                let mut e = self.lo.ceil() as i32;
                while (e as f64) <= self.hi + 1e-9 {
                    out.push((10f64.powi(e), format!("1e{e}")));
                    e += 1;
                }
                out
            }
            Scale::Linear => {
                let span = self.hi - self.lo;
                let raw = span / 5.0;
                let mag = 10f64.powf(raw.log10().floor());
                let step = [1.0, 2.0, 5.0, 10.0]
                    .iter()
                    .map(|m| m * mag)
                    .find(|s| *s >= raw)
                    .unwrap_or(10.0 * mag);
                let mut out = Vec::new();
                let mut v = (self.lo / step).ceil() * step;
                while v <= self.hi + 1e-9 * span {
                    let v_clean = if v.abs() < 1e-12 * span { 0.0 } else { v };
                    out.push((v_clean, format_tick(v_clean)));
                    v += step;
                }
                out
            }
        }
    }
}

fn format_tick(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-3..1e4).contains(&a) {
        format!("{v:.0e}")
    } else {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl Chart {
    fn render_into(&self, out: &mut String, ox: f64, oy: f64) {
        let pw = PANEL_WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
        let ph = PANEL_HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
        let x_axis = Axis::fit(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)), self.x_scale);
        let y_axis = Axis::fit(self.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)), Scale::Linear);
        let left = ox + MARGIN_LEFT;
        let top = oy + MARGIN_TOP;
        let px = |f: f64| left + f * pw;
        let py = |f: f64| top + (1.0 - f) * ph;

        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="14" text-anchor="middle">{}</text>"#,
            left + pw / 2.0,
            oy + 22.0,
            escape(&self.title)
        );
        let _ = writeln!(
            out,
            r##"<rect x="{left:.1}" y="{top:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="#333"/>"##
        );
        for (v, label) in x_axis.ticks() {
            if let Some(f) = x_axis.frac(v).filter(|f| (-1e-9..=1.0 + 1e-9).contains(f)) {
                let x = px(f);
                let _ = writeln!(
                    out,
                    r##"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="#333"/><text x="{x:.1}" y="{:.1}" font-size="11" text-anchor="middle">{label}</text>"##,
                    top + ph,
                    top + ph + 5.0,
                    top + ph + 18.0
                );
            }
        }
        for (v, label) in y_axis.ticks() {
            if let Some(f) = y_axis.frac(v).filter(|f| (-1e-9..=1.0 + 1e-9).contains(f)) {
                let y = py(f);
                let _ = writeln!(
                    out,
                    r##"<line x1="{:.1}" y1="{y:.1}" x2="{left:.1}" y2="{y:.1}" stroke="#333"/><text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{label}</text>"##,
                    left - 5.0,
                    left - 8.0,
                    y + 4.0
                );
            }
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{}</text>"#,
            left + pw / 2.0,
            top + ph + 40.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
            ox + 18.0,
            top + ph / 2.0,
            ox + 18.0,
            top + ph / 2.0,
            escape(&self.y_label)
        );

        for (i, s) in self.series.iter().enumerate() {
            let pts: Vec<(f64, f64)> = s
                .points
                .iter()
                .filter_map(|&(x, y)| Some((px(x_axis.frac(x)?), py(y_axis.frac(y)?))))
                .collect();
            if s.style == Style::Markers || pts.len() == 1 {
                for (x, y) in &pts {
                    let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.8" fill="{}"/>"#, s.color);
                }
            } else if !pts.is_empty() {
                let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
                let dash = if s.style == Style::Dashed {
                    r#" stroke-dasharray="6,4""#
                } else {
                    ""
                };
                let _ = writeln!(
                    out,
                    r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5"{dash}/>"#,
                    path.join(" "),
                    s.color
                );
            }
            let ly = top + 12.0 + 16.0 * i as f64;
            let lx = left + pw + 10.0;
            let _ = writeln!(
                out,
                r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{}" stroke-width="2"{}/><text x="{:.1}" y="{:.1}" font-size="11">{}</text>"#,
                lx + 18.0,
                s.color,
                if s.style == Style::Dashed { r#" stroke-dasharray="4,3""# } else { "" },
                lx + 24.0,
                ly + 4.0,
                escape(&s.label)
            );
        }
    }

    pub fn render(&self) -> String {
        render_grid(std::slice::from_ref(self), 1)
    }
}

/// Lays out charts on a grid with `columns` panels per row.
pub fn render_grid(charts: &[Chart], columns: usize) -> String {
    let columns = columns.max(1);
    let rows = charts.len().div_ceil(columns).max(1);
    let width = PANEL_WIDTH * columns.min(charts.len().max(1)) as f64;
    let height = PANEL_HEIGHT * rows as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (i, chart) in charts.iter().enumerate() {
        let ox = PANEL_WIDTH * (i % columns) as f64;
        let oy = PANEL_HEIGHT * (i / columns) as f64;
        chart.render_into(&mut out, ox, oy);
    }
    out.push_str("</svg>\n");
    out
}

fn color(i: usize) -> &'static str {
    PALETTE[i % PALETTE.len()]
}

/// Four panels: excitation probability with the Landau-Zener reference,
/// normalized final energy, coherence and skew information, all against τ.
pub fn sweep_charts(table: &SweepTable) -> Vec<Chart> {
    type Pick = fn(&crate::experiments::SweepRow) -> f64;
    let panels: [(&str, &str, Pick); 4] = [
        ("Excitation probability", "P", |r| r.p_excited),
        ("Final energy / ground energy", "E / E_ground", |r| r.energy_normalized),
        ("Relative entropy of coherence", "C (nats)", |r| r.coherence),
        ("Wigner-Yanase skew information", "Y", |r| r.skew_information),
    ];
    let kappas = table.kappas();
    panels
        .iter()
        .enumerate()
        .map(|(panel, (title, y_label, pick))| {
            let mut series: Vec<Series> = kappas
                .iter()
                .enumerate()
                .map(|(i, &k)| {
                    let pts = table.rows_for(k).map(|r| (r.tau, pick(r))).collect();
                    Series::new(format!("κ = {k}"), pts, color(i), Style::Line)
                })
                .collect();
            if panel == 0 {
                let mut seen = Vec::new();
                let pts = table
                    .rows
                    .iter()
                    .filter(|r| {
                        let new = !seen.contains(&r.tau.to_bits());
                        seen.push(r.tau.to_bits());
                        new
                    })
                    .map(|r| (r.tau, r.p_lz_formula))
                    .collect();
                series.push(Series::new("LZ formula", pts, "#d62728", Style::Dashed));
            }
            Chart {
                title: title.to_string(),
                x_label: "τ".into(),
                y_label: y_label.to_string(),
                x_scale: Scale::Log,
                series,
            }
        })
        .collect()
}

/// Stationary energies against Δ, one marker colour per branch, with the
/// linear spectrum as gray reference lines.
pub fn spectrum_chart(table: &SpectrumTable) -> Chart {
    let mut series = Vec::new();
    let mut refs_minus = Vec::new();
    let mut refs_plus = Vec::new();
    let mut last_delta = None;
    for r in &table.rows {
        if last_delta != Some(r.delta.to_bits()) {
            refs_minus.push((r.delta, r.linear_ref_minus));
            refs_plus.push((r.delta, r.linear_ref_plus));
            last_delta = Some(r.delta.to_bits());
        }
    }
    series.push(Series::new("linear", refs_minus, "#aaaaaa", Style::Line));
    series.push(Series::new("", refs_plus, "#aaaaaa", Style::Line));
    for (i, branch) in [Branch::Ground, Branch::Excited, Branch::Loop].into_iter().enumerate() {
        let pts: Vec<(f64, f64)> = table
            .rows
            .iter()
            .filter(|r| r.branch == branch)
            .map(|r| (r.delta, r.energy))
            .collect();
        if !pts.is_empty() {
            series.push(Series::new(branch.name(), pts, color(i), Style::Markers));
        }
    }
    Chart {
        title: "Generalized spectrum".into(),
        x_label: "Δ".into(),
        y_label: "E".into(),
        x_scale: Scale::Linear,
        series,
    }
}

pub fn lz_chart(report: &LzCheckReport) -> Chart {
    Chart {
        title: "Linear model vs Landau-Zener formula".into(),
        x_label: "τ".into(),
        y_label: "P".into(),
        x_scale: Scale::Log,
        series: vec![
            Series::new(
                "numeric",
                report.rows.iter().map(|r| (r.tau, r.p_numeric)).collect(),
                color(0),
                Style::Markers,
            ),
            Series::new(
                "LZ formula",
                report.rows.iter().map(|r| (r.tau, r.p_formula)).collect(),
                "#d62728",
                Style::Dashed,
            ),
        ],
    }
}

pub fn trajectory_chart(rows: &[TrajectoryRow]) -> Chart {
    let comp = |f: fn(&TrajectoryRow) -> f64| rows.iter().map(|r| (r.t, f(r))).collect::<Vec<_>>();
    Chart {
        title: "Bloch vector".into(),
        x_label: "t".into(),
        y_label: "component".into(),
        x_scale: Scale::Linear,
        series: vec![
            Series::new("x", comp(|r| r.x), color(0), Style::Line),
            Series::new("y", comp(|r| r.y), color(1), Style::Line),
            Series::new("z", comp(|r| r.z), color(2), Style::Line),
        ],
    }
}

pub fn write_svg(svg: &str, path: &Path) -> io::Result<()> {
    fs::write(path, svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{CellStatus, SpectrumRow, SweepRow};
    use crate::model::NonlinearityKind;

    fn row(kappa: f64, tau: f64) -> SweepRow {
        SweepRow {
            kind: NonlinearityKind::GrossPitaevskii,
            kappa,
            tau,
            p_excited: 0.5,
            energy_final: -40.0,
            energy_normalized: 0.8,
            coherence: 0.6,
            skew_information: 3.0,
            p_lz_formula: 0.4,
            purity_drift: 0.0,
            status: CellStatus::Ok,
        }
    }

    #[test]
    fn sweep_plot_has_dashed_reference_and_log_axis() {
        let table = SweepTable {
            rows: vec![row(0.0, 1.0), row(0.0, 10.0), row(4.0, 1.0), row(4.0, 10.0)],
            energy_ground: -50.0,
        };
        let svg = render_grid(&sweep_charts(&table), 2);
        assert!(svg.starts_with("<svg"));
        assert!(svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("stroke-dasharray"));
        assert!(svg.contains("LZ formula"));
        assert!(svg.contains("κ = 4"));
        assert!(svg.contains(">1e0<") && svg.contains(">1e1<"));
    }

    #[test]
    fn single_point_series_renders() {
        let table = SweepTable {
            rows: vec![row(1.0, 5.0)],
            energy_ground: -50.0,
        };
        let svg = render_grid(&sweep_charts(&table), 2);
        assert!(svg.contains("<circle"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn spectrum_plot_has_gray_reference() {
        let rows = vec![
            SpectrumRow {
                delta: -1.0,
                branch: Branch::Ground,
                x: -0.7,
                z: 0.7,
                energy: -1.4,
                linear_ref_minus: -1.414,
                linear_ref_plus: 1.414,
            },
            SpectrumRow {
                delta: -1.0,
                branch: Branch::Excited,
                x: 0.7,
                z: -0.7,
                energy: 1.4,
                linear_ref_minus: -1.414,
                linear_ref_plus: 1.414,
            },
        ];
        let table = SpectrumTable {
            rows,
            root_counts: vec![(-1.0, 2)],
        };
        let svg = spectrum_chart(&table).render();
        assert!(svg.contains("#aaaaaa"));
        assert!(svg.contains("ground") && svg.contains("excited"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn log_axis_skips_non_positive_values() {
        let chart = Chart {
            title: "t".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            x_scale: Scale::Log,
            series: vec![Series::new("s", vec![(0.0, 1.0), (1.0, 2.0), (10.0, 3.0)], "#000", Style::Line)],
        };
        let svg = chart.render();
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
