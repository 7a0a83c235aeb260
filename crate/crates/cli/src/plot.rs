//! Hand-written SVG line plots of the CSV reports.

use std::fmt::Write as _;
use std::path::Path;

use degenlab_core::io::{read_numeric_table, NumericTable};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Schema {
    /// `r, cutoff, norm`
    Scan,
    /// `tau, mean, mean_zero_l2, h<s>...`
    Heat,
    /// `s, eps, input_norm, output_norm, ratio`
    Probe,
}

impl Schema {
    pub fn tag(self) -> &'static str {
        match self {
            Schema::Scan => "scan",
            Schema::Heat => "heat",
            Schema::Probe => "probe",
        }
    }

    pub fn detect(header: &[String]) -> Result<Self, CliError> {
        let h: Vec<&str> = header.iter().map(String::as_str).collect();
        match h.as_slice() {
            ["r", "cutoff", "norm"] => Ok(Schema::Scan),
            ["s", "eps", "input_norm", "output_norm", "ratio"] => Ok(Schema::Probe),
            ["tau", "mean", "mean_zero_l2", rest @ ..]
                if !rest.is_empty() && rest.iter().all(|c| c.starts_with('h')) =>
            {
                Ok(Schema::Heat)
            }
            _ => Err(CliError::Plot(format!("unknown report schema with columns {h:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Figure {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub force_log_x: bool,
    pub force_log_y: bool,
    pub series: Vec<Series>,
}

/// Groups long-format rows by the value in column `key`, keeping first-seen order.
fn grouped(t: &NumericTable, key: usize, x: usize, y: usize) -> Vec<(f64, Vec<(f64, f64)>)> {
    let mut out: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
    for r in &t.rows {
        match out.iter_mut().find(|(k, _)| k.to_bits() == r[key].to_bits()) {
            Some((_, pts)) => pts.push((r[x], r[y])),
            None => out.push((r[key], vec![(r[x], r[y])])),
        }
    }
    out
}

pub fn figure(schema: Schema, t: &NumericTable) -> Figure {
    match schema {
        Schema::Scan => Figure {
            title: "truncated Sobolev norm against frequency cutoff".into(),
            x_label: "cutoff".into(),
            y_label: "norm".into(),
            force_log_x: false,
            force_log_y: false,
            series: grouped(t, 0, 1, 2)
                .into_iter()
                .map(|(r, points)| Series { label: format!("r = {r:.4}"), points })
                .collect(),
        },
        Schema::Probe => Figure {
            title: "solution-to-data norm ratio against squeeze factor".into(),
            x_label: "eps".into(),
            y_label: "ratio".into(),
            force_log_x: true,
            force_log_y: true,
            series: grouped(t, 0, 1, 4)
                .into_iter()
                .map(|(s, points)| Series { label: format!("s = {s:.4}"), points })
                .collect(),
        },
        Schema::Heat => Figure {
            title: "Sobolev norms along the heat flow".into(),
            x_label: "tau".into(),
            y_label: "norm".into(),
            force_log_x: false,
            force_log_y: true,
            series: t.header[3..]
                .iter()
                .enumerate()
                .map(|(k, h)| Series {
                    label: format!("s = {}", &h[1..]),
                    points: t.rows.iter().map(|r| (r[0], r[3 + k])).collect(),
                })
                .collect(),
        },
    }
}

/// Spanning at least two decades on strictly positive data.
pub fn wants_log(values: &[f64]) -> bool {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() || finite.iter().any(|&v| v <= 0.0) {
        return false;
    }
    let lo = finite.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = finite.iter().copied().fold(0.0, f64::max);
    hi / lo >= 100.0
}

#[derive(Debug, Clone, Copy)]
struct Axis {
    log: bool,
    lo: f64,
    hi: f64,
}

impl Axis {
    fn new(values: &[f64], log: bool) -> Self {
        let vals: Vec<f64> = values
            .iter()
            .copied()
            .filter(|v| v.is_finite() && (!log || *v > 0.0))
            .map(|v| if log { v.log10() } else { v })
            .collect();
        let mut lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let mut hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 * lo.abs().max(1.0) {
            lo -= 0.5;
            hi += 0.5;
        }
        if log {
            (lo, hi) = (lo.floor(), hi.ceil());
        } else {
            let pad = 0.05 * (hi - lo);
            (lo, hi) = (lo - pad, hi + pad);
        }
        Self { log, lo, hi }
    }

    /// Position in `[0, 1]`, or `None` for values a log axis cannot show.
    fn unit(&self, v: f64) -> Option<f64> {
        if !v.is_finite() || (self.log && v <= 0.0) {
            return None;
        }
        let w = if self.log { v.log10() } else { v };
        Some((w - self.lo) / (self.hi - self.lo))
    }

    /// Tick positions (in axis coordinates) and labels.
    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let step = ((self.hi - self.lo) / 8.0).ceil().max(1.0);
            let mut out = Vec::new();
            let mut k = self.lo;
            while k <= self.hi + 1e-9 {
                out.push((k, format!("1e{}", k as i64)));
                k += step;
            }
            return out;
        }
        let raw = (self.hi - self.lo) / 6.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
        let mut out = Vec::new();
        let decimals = (-step.log10().floor()).clamp(0.0, 12.0) as usize;
        let scientific = step < 1e-4 || self.hi.abs().max(self.lo.abs()) >= 1e6;
        let mut k = (self.lo / step).ceil();
        while k * step <= self.hi + 1e-9 * step {
            // multiples of the step avoid accumulated drift and a printed -0
            let v = k * step + 0.0;
            let label = if scientific { format!("{v:.2e}") } else { format!("{v:.decimals$}") };
            out.push((v, label));
            k += 1.0;
        }
        out
    }
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const COLORS: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace("--", "- -")
}

pub fn render_svg(fig: &Figure, meta: &[(&str, &str)]) -> String {
    let xs: Vec<f64> = fig.series.iter().flat_map(|s| s.points.iter().map(|p| p.0)).collect();
    let ys: Vec<f64> = fig.series.iter().flat_map(|s| s.points.iter().map(|p| p.1)).collect();
    let ax = Axis::new(&xs, fig.force_log_x || wants_log(&xs));
    let ay = Axis::new(&ys, fig.force_log_y || wants_log(&ys));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |u: f64| LEFT + u * pw;
    let py = |u: f64| TOP + (1.0 - u) * ph;

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let meta_line: Vec<String> = meta.iter().map(|(k, v)| format!("{k}={}", escape(v))).collect();
    let _ = writeln!(s, "<!-- degenlab plot; {} -->", meta_line.join("; "));
    let _ = writeln!(s, "<title>{}</title>", escape(&fig.title));
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&fig.title)
    );
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);

    for (v, label) in ax.ticks() {
        let x = px((v - ax.lo) / (ax.hi - ax.lo));
        let _ =
            writeln!(s, r##"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="#dddddd"/>"##, TOP, TOP + ph);
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#, TOP + ph + 16.0);
    }
    for (v, label) in ay.ticks() {
        let y = py((v - ay.lo) / (ay.hi - ay.lo));
        let _ = writeln!(s, r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#dddddd"/>"##, LEFT + pw);
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, LEFT - 6.0, y + 4.0);
    }
    let scale = |log: bool| if log { " (log)" } else { "" };
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 18.0,
        escape(&fig.x_label),
        scale(ax.log)
    );
    let _ = writeln!(
        s,
        r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(&fig.y_label),
        scale(ay.log)
    );

    for (k, series) in fig.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let pts: Vec<String> = series
            .points
            .iter()
            .filter_map(|&(x, y)| Some(format!("{:.2},{:.2}", px(ax.unit(x)?), py(ay.unit(y)?))))
            .collect();
        if !pts.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                pts.join(" ")
            );
        }
        let ly = TOP + 14.0 + 18.0 * k as f64;
        let lx = LEFT + pw + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&series.label));
    }
    s.push_str("</svg>\n");
    s
}

/// Reads a report CSV and renders it. `expected` must agree with the
/// detected schema when given.
pub fn plot_report(path: &Path, expected: Option<Schema>, config_sha256: &str) -> Result<(Schema, String), CliError> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let table = read_numeric_table(file).map_err(|e| CliError::Plot(format!("{}: {e}", path.display())))?;
    let schema = Schema::detect(&table.header)?;
    if let Some(k) = expected {
        if k != schema {
            return Err(CliError::Plot(format!("{} holds a {} report, not {}", path.display(), schema.tag(), k.tag())));
        }
    }
    let source = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let svg = render_svg(
        &figure(schema, &table),
        &[("schema", schema.tag()), ("source", &source), ("config-sha256", config_sha256)],
    );
    Ok((schema, svg))
}
