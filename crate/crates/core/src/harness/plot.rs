//! Minimal deterministic SVG rendering of the series CSVs.
//!
//! Every plot `name.svg` is rendered from its twin `name.csv` in the same
//! directory, so re-running on the same data yields byte-identical files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;

use super::output::{self, read_table};

const W: f64 = 800.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;

const PALETTE: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];

struct Axes {
    x: (f64, f64),
    y: (f64, f64),
}

impl Axes {
    fn fit(xs: impl Iterator<Item = f64> + Clone, ys: impl Iterator<Item = f64> + Clone) -> Self {
        Self {
            x: range(xs),
            y: range(ys),
        }
    }

    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (W - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        H - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (H - TOP - BOTTOM)
    }
}

fn range(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v
        .filter(|x| x.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * lo.abs().max(1.0) {
        let pad = 0.5 * lo.abs().max(1e-3);
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn frame(svg: &mut String, title: &str, xlabel: &str, ylabel: &str, ax: &Axes) {
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="22" text-anchor="middle" font-size="15">{}</text>"#,
        (LEFT + W - RIGHT) / 2.0,
        escape(title)
    );
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, TOP, H - BOTTOM);
    let _ = writeln!(
        svg,
        r#"<rect x="{x0}" y="{y0}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y1 - y0
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let xv = ax.x.0 + f * (ax.x.1 - ax.x.0);
        let yv = ax.y.0 + f * (ax.y.1 - ax.y.0);
        let (px, py) = (ax.px(xv), ax.py(yv));
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{y1}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y1 + 5.0,
            y1 + 18.0,
            tick(xv)
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            tick(yv)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        H - 10.0,
        escape(xlabel)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );
}

fn tick(v: f64) -> String {
    if v == 0.0 || (1e-3..1e4).contains(&v.abs()) {
        format!("{v:.3}")
    } else {
        format!("{v:.2e}")
    }
}

fn legend(svg: &mut String, names: &[String]) {
    for (k, n) in names.iter().enumerate() {
        let y = TOP + 10.0 + 16.0 * k as f64;
        let x = W - RIGHT + 12.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            x + 18.0,
            PALETTE[k % PALETTE.len()],
            x + 24.0,
            y + 4.0,
            escape(n)
        );
    }
}

fn polyline(svg: &mut String, ax: &Axes, pts: impl Iterator<Item = (f64, f64)>, color: &str) {
    let mut s = String::new();
    for (x, y) in pts {
        let _ = write!(s, "{:.2},{:.2} ", ax.px(x), ax.py(y));
    }
    let _ = writeln!(
        svg,
        r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
        s.trim_end()
    );
}

/// Columns `cols` of `rows` against column 0.
pub fn line_plot(title: &str, header: &[String], rows: &[Vec<f64>], cols: &[usize], ylabel: &str) -> String {
    let ax = Axes::fit(
        rows.iter().map(|r| r[0]),
        rows.iter().flat_map(|r| cols.iter().map(move |&c| r[c])),
    );
    let mut svg = String::new();
    frame(&mut svg, title, &header[0], ylabel, &ax);
    for (k, &c) in cols.iter().enumerate() {
        polyline(&mut svg, &ax, rows.iter().map(|r| (r[0], r[c])), PALETTE[k % PALETTE.len()]);
    }
    legend(&mut svg, &cols.iter().map(|&c| header[c].clone()).collect::<Vec<_>>());
    svg.push_str("</svg>\n");
    svg
}

fn heat(f: f64) -> String {
    let f = f.clamp(0.0, 1.0);
    let r = (255.0 * f).round() as u8;
    let b = (255.0 * (1.0 - f)).round() as u8;
    format!("#{r:02x}40{b:02x}")
}

/// Contact map: `xi` against time, coloured by `F_z`.
pub fn contact_plot(rows: &[Vec<f64>]) -> String {
    let ax = Axes {
        x: range(rows.iter().map(|r| r[0])),
        y: (0.0, 3.0),
    };
    let fmax = rows.iter().map(|r| r[3]).fold(0.0, f64::max);
    let mut svg = String::new();
    frame(&mut svg, "Contact map", "t [s]", "xi [-]", &ax);
    for r in rows {
        let _ = writeln!(
            svg,
            r#"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="{}"/>"#,
            ax.px(r[0]),
            ax.py(r[1]),
            heat(if fmax > 0.0 { r[3] / fmax } else { 0.0 })
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}">F_z max {:.3} N</text>"#,
        W - RIGHT + 12.0,
        TOP + 10.0,
        fmax
    );
    svg.push_str("</svg>\n");
    svg
}

/// Backbone projections every `stride` samples, plus the base path.
pub fn xy_plot(rows: &[Vec<f64>], stride: usize) -> String {
    let ax = {
        let xs = range(rows.iter().map(|r| r[2]));
        let ys = range(rows.iter().map(|r| r[3]));
        // equal scale on both axes
        let sx = (xs.1 - xs.0) / (W - LEFT - RIGHT);
        let sy = (ys.1 - ys.0) / (H - TOP - BOTTOM);
        let s = sx.max(sy);
        let (cx, cy) = ((xs.0 + xs.1) / 2.0, (ys.0 + ys.1) / 2.0);
        let (hx, hy) = (s * (W - LEFT - RIGHT) / 2.0, s * (H - TOP - BOTTOM) / 2.0);
        Axes {
            x: (cx - hx, cx + hx),
            y: (cy - hy, cy + hy),
        }
    };
    let mut svg = String::new();
    frame(&mut svg, "Backbone projected on X-Y", "x [m]", "y [m]", &ax);
    let mut snapshots: Vec<&[Vec<f64>]> = Vec::new();
    let mut start = 0;
    for k in 1..=rows.len() {
        if k == rows.len() || rows[k][0] != rows[start][0] {
            snapshots.push(&rows[start..k]);
            start = k;
        }
    }
    let n = snapshots.len().max(1);
    for (k, snap) in snapshots.iter().enumerate() {
        if k % stride.max(1) == 0 || k + 1 == n {
            let f = k as f64 / (n - 1).max(1) as f64;
            polyline(&mut svg, &ax, snap.iter().map(|r| (r[2], r[3])), &heat(f));
        }
    }
    polyline(
        &mut svg,
        &ax,
        snapshots.iter().filter_map(|s| s.first()).map(|r| (r[2], r[3])),
        "black",
    );
    svg.push_str("</svg>\n");
    svg
}

fn columns_with(header: &[String], prefix: &str) -> Vec<usize> {
    (1..header.len()).filter(|&k| header[k].starts_with(prefix)).collect()
}

/// Render an SVG next to every known series CSV in `dir`.
///
/// Returns the written SVG paths in a fixed order.
pub fn export_plots(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut emit = |name: &str, svg: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, svg)?;
        written.push(path);
        Ok(())
    };
    let csv = |name: &str| {
        let p = dir.join(name);
        p.exists().then_some(p)
    };
    if let Some(p) = csv(output::BASE_POSE) {
        let (h, rows) = read_table(&p)?;
        emit("base_position.svg", line_plot("Base position", &h, &rows, &[1, 2, 3], "position [m]"))?;
        emit(
            "base_orientation.svg",
            line_plot("Base orientation", &h, &rows, &[4, 5, 6], "angle [rad]"),
        )?;
    }
    if let Some(p) = csv(output::JOINTS) {
        let (h, rows) = read_table(&p)?;
        let l = columns_with(&h, "l_");
        emit("joints.svg", line_plot("PMA length changes", &h, &rows, &l, "length change [m]"))?;
        let pc = columns_with(&h, "P_");
        if !pc.is_empty() {
            emit("pressures.svg", line_plot("Commanded pressures", &h, &rows, &pc, "pressure [bar]"))?;
        }
    }
    if let Some(p) = csv(output::CONTACTS) {
        let (_, rows) = read_table(&p)?;
        emit("contacts.svg", contact_plot(&rows))?;
    }
    if let Some(p) = csv(output::XY_PROJECTION) {
        let (_, rows) = read_table(&p)?;
        emit("xy_projection.svg", xy_plot(&rows, 15))?;
    }
    if let Some(p) = csv(output::DROP_Z) {
        let (h, rows) = read_table(&p)?;
        emit("drop_z.svg", line_plot("Drop test", &h, &rows, &[1, 2], "height [m]"))?;
    }
    Ok(written)
}
