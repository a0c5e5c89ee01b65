//! Deterministic SVG renderings of the per-analysis CSVs.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::failure::{Failure, Outcome};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const PAD: f64 = 48.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    SpectrumBars,
    Trajectory2d,
    RecoveryCurve,
    Interpolant,
}

impl PlotKind {
    pub const ALL: [PlotKind; 4] =
        [PlotKind::SpectrumBars, PlotKind::Trajectory2d, PlotKind::RecoveryCurve, PlotKind::Interpolant];

    pub fn name(self) -> &'static str {
        match self {
            PlotKind::SpectrumBars => "spectrum_bars",
            PlotKind::Trajectory2d => "trajectory_2d",
            PlotKind::RecoveryCurve => "recovery_curve",
            PlotKind::Interpolant => "interpolant",
        }
    }

    /// Columns the input CSV must carry.
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            PlotKind::SpectrumBars => &["index", "magnitude"],
            PlotKind::Trajectory2d => &["start_id", "step", "x", "y"],
            PlotKind::RecoveryCurve => &["t", "recovery"],
            PlotKind::Interpolant => &["x", "f_x"],
        }
    }
}

impl FromStr for PlotKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        PlotKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown plot kind {s:?}; expected one of spectrum_bars, trajectory_2d, recovery_curve, interpolant"))
    }
}

/// Numeric columns picked out of a CSV by name.
fn columns(csv: &str, want: &[&str]) -> Outcome<Vec<Vec<f64>>> {
    let mut lines = csv.lines().filter(|l| !l.trim().is_empty());
    let header: Vec<&str> = lines.next().ok_or_else(|| Failure::Usage("empty CSV".into()))?.split(',').map(str::trim).collect();
    let idx: Vec<usize> = want
        .iter()
        .map(|w| {
            header.iter().position(|h| h == w).ok_or_else(|| {
                Failure::Usage(format!("CSV schema mismatch: missing column {w:?} (have {})", header.join(",")))
            })
        })
        .collect::<Outcome<_>>()?;
    let mut out = vec![Vec::new(); want.len()];
    for (k, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        for (slot, &i) in idx.iter().enumerate() {
            let v = cells
                .get(i)
                .and_then(|c| c.parse::<f64>().ok())
                .ok_or_else(|| Failure::Usage(format!("CSV row {}: column {:?} is not numeric", k + 2, want[slot])))?;
            out[slot].push(v);
        }
    }
    Ok(out)
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn fit(xs: &[f64], ys: &[f64]) -> Self {
        let span = |v: &[f64]| {
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() {
                (0.0, 1.0)
            } else if hi - lo < 1e-12 {
                (lo - 0.5, hi + 0.5)
            } else {
                (lo, hi)
            }
        };
        Self { x: span(xs), y: span(ys) }
    }

    fn px(&self, x: f64) -> f64 {
        PAD + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - 2.0 * PAD)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - PAD - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - 2.0 * PAD)
    }
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}">"#);
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" font-family="sans-serif" font-size="14" text-anchor="middle">{title}</text>"#, WIDTH / 2.0);
    s
}

fn axes(s: &mut String, f: &Frame) {
    let (x0, x1, y0, y1) = (PAD, WIDTH - PAD, HEIGHT - PAD, PAD);
    let _ = writeln!(s, r#"<path d="M{x0} {y1} L{x0} {y0} L{x1} {y0}" fill="none" stroke="black"/>"#);
    let label = |s: &mut String, x: f64, y: f64, anchor: &str, v: f64| {
        let _ = writeln!(s, r#"<text x="{x:.2}" y="{y:.2}" font-family="sans-serif" font-size="10" text-anchor="{anchor}">{v:.3}</text>"#);
    };
    label(s, x0, y0 + 14.0, "middle", f.x.0);
    label(s, x1, y0 + 14.0, "middle", f.x.1);
    label(s, x0 - 4.0, y0, "end", f.y.0);
    label(s, x0 - 4.0, y1 + 4.0, "end", f.y.1);
}

fn polyline(s: &mut String, f: &Frame, xs: &[f64], ys: &[f64], stroke: &str) {
    let pts: Vec<String> = xs.iter().zip(ys).map(|(&x, &y)| format!("{:.2},{:.2}", f.px(x), f.py(y))).collect();
    let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="1.5"/>"#, pts.join(" "));
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

pub fn render(kind: PlotKind, csv: &str) -> Outcome<String> {
    let cols = columns(csv, kind.columns())?;
    let mut s;
    match kind {
        PlotKind::SpectrumBars => {
            let mut mags = cols[1].clone();
            mags.sort_by(|a, b| b.total_cmp(a));
            s = header("eigenvalue magnitudes");
            let zero = vec![0.0];
            let f = Frame::fit(&[0.0, mags.len() as f64], &[zero, mags.clone()].concat());
            axes(&mut s, &f);
            let w = (WIDTH - 2.0 * PAD) / mags.len().max(1) as f64;
            for (k, m) in mags.iter().enumerate() {
                let (top, base) = (f.py(*m), f.py(0.0));
                let _ = writeln!(
                    s,
                    r##"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="#1f77b4"/>"##,
                    PAD + k as f64 * w + 0.1 * w,
                    top.min(base),
                    0.8 * w,
                    (base - top).abs()
                );
            }
        }
        PlotKind::Trajectory2d => {
            s = header("trajectories");
            let f = Frame::fit(&cols[2], &cols[3]);
            axes(&mut s, &f);
            let mut start = 0;
            let ids = &cols[0];
            while start < ids.len() {
                let mut end = start;
                while end < ids.len() && ids[end] == ids[start] {
                    end += 1;
                }
                let mut order: Vec<usize> = (start..end).collect();
                order.sort_by(|&a, &b| cols[1][a].total_cmp(&cols[1][b]));
                let xs: Vec<f64> = order.iter().map(|&i| cols[2][i]).collect();
                let ys: Vec<f64> = order.iter().map(|&i| cols[3][i]).collect();
                polyline(&mut s, &f, &xs, &ys, PALETTE[ids[start] as usize % PALETTE.len()]);
                let last = *order.last().unwrap();
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="black"/>"#, f.px(cols[2][last]), f.py(cols[3][last]));
                start = end;
            }
        }
        PlotKind::RecoveryCurve => {
            s = header("recovery probability");
            let f = Frame::fit(&cols[0], &[cols[1].clone(), vec![0.0, 1.0]].concat());
            axes(&mut s, &f);
            polyline(&mut s, &f, &cols[0], &cols[1], PALETTE[0]);
        }
        PlotKind::Interpolant => {
            s = header("interpolant");
            let f = Frame::fit(&cols[0], &[cols[1].clone(), cols[0].clone()].concat());
            axes(&mut s, &f);
            let _ = writeln!(
                s,
                r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#999999" stroke-dasharray="4 3"/>"##,
                f.px(f.x.0),
                f.py(f.x.0),
                f.px(f.x.1),
                f.py(f.x.1)
            );
            polyline(&mut s, &f, &cols[0], &cols[1], PALETTE[1]);
        }
    }
    s.push_str("</svg>\n");
    Ok(s)
}
