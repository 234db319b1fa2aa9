//! Minimal SVG emitter: log10(value) against dB, one polyline per curve and
//! a dotted reference line of slope `-d` for every distinct predicted
//! exponent `d`. Coordinates are printed with fixed precision so the output
//! is byte-identical for identical inputs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use wishart_core::pep::PepCurve;

use crate::output::alpha_label;
use crate::CliError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// `(gamma_db, value)`, ascending in dB.
    pub points: Vec<(f64, f64)>,
    pub exponent: u32,
}

impl Series {
    pub fn from_curve(curve: &PepCurve) -> Series {
        Series {
            label: format!("{} {}x{} [{}]", curve.source.name(), curve.dims.n(), curve.dims.m(), alpha_label(curve)),
            points: curve.points.iter().map(|p| (p.gamma_db, p.value)).collect(),
            exponent: curve.predicted_exponent,
        }
    }

    fn log_points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().filter(|p| p.1 > 0.0 && p.1.is_finite()).map(|&(x, v)| (x, v.log10()))
    }
}

/// Reads every curve from a CSV written by `pep`. Rows are grouped by
/// `(source, n, m, alpha)` in order of first appearance.
pub fn read_series(path: &Path) -> Result<Vec<Series>, CliError> {
    let bad = |msg: String| CliError::Usage(format!("{}: {msg}", path.display()));
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path)?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| bad(format!("missing column {name}")));
    let (c_db, c_val, c_src, c_n, c_m, c_alpha, c_exp) = (
        col("gamma_db")?,
        col("value")?,
        col("source")?,
        col("n")?,
        col("m")?,
        col("alpha")?,
        col("predicted_exponent")?,
    );
    let mut order: Vec<String> = Vec::new();
    let mut groups: BTreeMap<String, Series> = BTreeMap::new();
    for (i, record) in reader.records().enumerate() {
        let r = record.map_err(|e| bad(e.to_string()))?;
        let field = |c: usize| r.get(c).ok_or_else(|| bad(format!("row {}: too few fields", i + 1)));
        let num = |c: usize| field(c)?.parse::<f64>().map_err(|_| bad(format!("row {}: bad number", i + 1)));
        let label = format!("{} {}x{} [{}]", field(c_src)?, field(c_n)?, field(c_m)?, field(c_alpha)?);
        let exponent: u32 = field(c_exp)?.parse().map_err(|_| bad(format!("row {}: bad exponent", i + 1)))?;
        let (db, value) = (num(c_db)?, num(c_val)?);
        let entry = groups.entry(label.clone()).or_insert_with(|| {
            order.push(label.clone());
            Series { label, points: Vec::new(), exponent }
        });
        entry.points.push((db, value));
    }
    if order.is_empty() {
        return Err(bad("no data rows".into()));
    }
    Ok(order.into_iter().map(|l| groups.remove(&l).unwrap()).collect())
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 8.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0].into_iter().map(|f| f * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag)
}

pub fn render_svg(series: &[Series]) -> Result<String, CliError> {
    let all: Vec<(f64, f64)> = series.iter().flat_map(|s| s.log_points()).collect();
    if all.is_empty() {
        return Err(CliError::Usage("nothing to plot: no positive values".into()));
    }
    let x_lo = all.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let mut x_hi = all.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if x_hi <= x_lo {
        x_hi = x_lo + 1.0;
    }
    let y_hi = all.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max).ceil().max(0.0);
    let mut y_lo = all.iter().map(|p| p.1).fold(f64::INFINITY, f64::min).floor();
    if y_lo >= y_hi {
        y_lo = y_hi - 1.0;
    }
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x - x_lo) / (x_hi - x_lo) * pw;
    let sy = |y: f64| TOP + (y_hi - y) / (y_hi - y_lo) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(svg, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);

    let step = nice_step(x_hi - x_lo);
    let first = (x_lo / step).ceil();
    for i in 0.. {
        let tick = ((first + i as f64) * step * 1e6).round() / 1e6;
        if tick > x_hi + 1e-9 {
            break;
        }
        let x = sx(tick);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{TOP}" stroke="lightgray"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{tick}</text>"#,
            TOP + ph,
            TOP + ph + 16.0
        );
    }
    let decades = (y_hi - y_lo) as i32;
    let every = (decades / 10 + 1).max(1);
    for k in (0..=decades).step_by(every as usize) {
        let v = y_lo + k as f64;
        let y = sy(v);
        let _ = writeln!(
            svg,
            r#"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="lightgray"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{v}</text>"#,
            LEFT + pw,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">SNR (dB)</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 10.0
    );
    let _ = writeln!(svg, r#"<clipPath id="plot"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></clipPath>"#);

    // One reference line per exponent, through the highest final point
    // among curves sharing it.
    let mut anchors: BTreeMap<u32, (f64, f64)> = BTreeMap::new();
    for s in series {
        if let Some(last) = s.log_points().last() {
            let a = anchors.entry(s.exponent).or_insert(last);
            if last.1 > a.1 {
                *a = last;
            }
        }
    }
    for (d, (x0, y0)) in &anchors {
        let at = |x: f64| y0 - *d as f64 * (x - x0) / 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="gray" stroke-dasharray="2,3" clip-path="url(#plot)"/>"#,
            sx(x_lo),
            sy(at(x_lo)),
            sx(x_hi),
            sy(at(x_hi))
        );
    }

    for (i, s) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let pts: Vec<String> = s.log_points().map(|(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5" clip-path="url(#plot)"/>"#,
            pts.join(" ")
        );
        let ly = TOP + 14.0 + 16.0 * i as f64;
        let lx = LEFT + pw + 10.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="1.5"/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
            ly - 4.0,
            lx + 16.0,
            ly - 4.0,
            lx + 20.0,
            escape(&s.label)
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
