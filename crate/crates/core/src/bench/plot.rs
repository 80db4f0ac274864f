//! Deterministic SVG rendering of experiment datasets, one series per `M`.

use std::fmt::{self, Write as _};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use crate::error::{Error, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 110.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const TICKS: usize = 5;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PlotKind {
    /// Mean absolute error against coupling strength.
    Line,
    /// Exceed counts against deviation radius, drawn as steps.
    Histogram,
}

impl PlotKind {
    fn axes(self) -> (&'static str, &'static str) {
        match self {
            PlotKind::Line => ("c", "mean_abs_error"),
            PlotKind::Histogram => ("r", "exceed_count"),
        }
    }
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PlotKind::Line => "line",
            PlotKind::Histogram => "histogram",
        })
    }
}

impl FromStr for PlotKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "line" => Ok(PlotKind::Line),
            "histogram" => Ok(PlotKind::Histogram),
            _ => Err(Error::invalid(format!("unknown plot kind `{s}` (expected line or histogram)"))),
        }
    }
}

struct Scale {
    lo: f64,
    hi: f64,
    from: f64,
    to: f64,
}

impl Scale {
    fn new(lo: f64, hi: f64, from: f64, to: f64) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        Scale { lo, hi, from, to }
    }

    fn map(&self, v: f64) -> f64 {
        self.from + (v - self.lo) / (self.hi - self.lo) * (self.to - self.from)
    }
}

fn range(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// Renders the dataset as an SVG document. Identical input yields identical bytes.
pub fn emit_plot(dataset: &Dataset, kind: PlotKind) -> Result<String> {
    let (x_name, y_name) = kind.axes();
    let (xi, yi, mi) = (dataset.column_index(x_name)?, dataset.column_index(y_name)?, dataset.column_index("M")?);
    if dataset.rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(Error::Parse("dataset contains a non-finite value".into()));
    }

    let mut series: Vec<(f64, Vec<(f64, f64)>)> = Vec::new();
    for row in &dataset.rows {
        match series.iter_mut().find(|(m, _)| *m == row[mi]) {
            Some((_, pts)) => pts.push((row[xi], row[yi])),
            None => series.push((row[mi], vec![(row[xi], row[yi])])),
        }
    }
    series.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (_, pts) in &mut series {
        pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    }

    let (x_lo, x_hi) = range(dataset.rows.iter().map(|r| r[xi])).unwrap_or((0.0, 1.0));
    let y_hi = range(dataset.rows.iter().map(|r| r[yi])).map_or(1.0, |(_, hi)| hi.max(0.0));
    let y_lo = range(dataset.rows.iter().map(|r| r[yi])).map_or(0.0, |(lo, _)| lo.min(0.0));
    let sx = Scale::new(x_lo, x_hi, LEFT, WIDTH - RIGHT);
    let sy = Scale::new(y_lo, if y_hi > y_lo { y_hi } else { y_lo + 1.0 }, HEIGHT - BOTTOM, TOP);

    let mut svg = String::new();
    let w = &mut svg;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(w, r#"<g class="axes" stroke="black" stroke-width="1">"#);
    let _ = writeln!(w, r#"<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>"#);
    let _ = writeln!(w, r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>"#);
    for k in 0..=TICKS {
        let t = k as f64 / TICKS as f64;
        let xv = sx.lo + t * (sx.hi - sx.lo);
        let yv = sy.lo + t * (sy.hi - sy.lo);
        let (px, py) = (sx.map(xv), sy.map(yv));
        let _ = writeln!(w, r#"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{:.2}"/>"#, y0 + 5.0);
        let _ = writeln!(w, r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0}" y2="{py:.2}"/>"#, x0 - 5.0);
    }
    let _ = writeln!(w, "</g>");
    let _ = writeln!(w, r#"<g class="labels" fill="black">"#);
    for k in 0..=TICKS {
        let t = k as f64 / TICKS as f64;
        let xv = sx.lo + t * (sx.hi - sx.lo);
        let yv = sy.lo + t * (sy.hi - sy.lo);
        let _ =
            writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, sx.map(xv), y0 + 18.0, tick(xv));
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 8.0,
            sy.map(yv) + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{x_name}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        w,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{y_name}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    let _ = writeln!(w, "</g>");

    for (k, (m, pts)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut d = String::new();
        for (p, &(x, y)) in pts.iter().enumerate() {
            let (px, py) = (sx.map(x), sy.map(y));
            match (p, kind) {
                (0, _) => {
                    let _ = write!(d, "M {px:.2} {py:.2}");
                }
                (_, PlotKind::Line) => {
                    let _ = write!(d, " L {px:.2} {py:.2}");
                }
                (_, PlotKind::Histogram) => {
                    let _ = write!(d, " H {px:.2} V {py:.2}");
                }
            }
        }
        let _ = writeln!(
            w,
            r#"<path class="series" data-m="{m}" d="{d}" fill="none" stroke="{color}" stroke-width="1.5"/>"#
        );
        let ly = TOP + 16.0 * k as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            w,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/>"#,
            lx + 18.0
        );
        let _ = writeln!(w, r#"<text x="{:.2}" y="{:.2}">M = {m}</text>"#, lx + 24.0, ly + 4.0);
    }
    let _ = writeln!(w, "</svg>");
    Ok(svg)
}

fn tick(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}
