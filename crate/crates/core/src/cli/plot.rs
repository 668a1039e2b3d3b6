//! Minimal SVG emission for slope fits, traces and enclosure slices.

use std::fmt::Write;

use crate::geometry::{Point3, Region};
use crate::indicator::{extract_length_with, Enclosure, FitOptions, ProbeResult};
use crate::medium::Background;

use super::output::{comment_value, read_numeric_csv};

const W: f64 = 640.0;
const H: f64 = 480.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

struct Canvas {
    body: String,
    x: (f64, f64),
    y: (f64, f64),
}

impl Canvas {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let pad = |(a, b): (f64, f64)| if a == b { (a - 0.5, b + 0.5) } else { (a, b) };
        Self { body: String::new(), x: pad(x), y: pad(y) }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x.0) / (self.x.1 - self.x.0) * (W - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        H - MARGIN - (y - self.y.0) / (self.y.1 - self.y.0) * (H - 2.0 * MARGIN)
    }

    fn axes(&mut self, xlabel: &str, ylabel: &str) {
        let (x0, x1, y0, y1) = (MARGIN, W - MARGIN, H - MARGIN, MARGIN);
        let _ = write!(
            self.body,
            r##"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="#000"/>"##,
            x1 - x0,
            y0 - y1
        );
        for k in 0..=4 {
            let f = k as f64 / 4.0;
            let xv = self.x.0 + f * (self.x.1 - self.x.0);
            let yv = self.y.0 + f * (self.y.1 - self.y.0);
            let _ = write!(
                self.body,
                r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{}</text>"#,
                self.px(xv),
                y0 + 16.0,
                tick(xv)
            );
            let _ = write!(
                self.body,
                r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="end">{}</text>"#,
                x0 - 6.0,
                self.py(yv) + 4.0,
                tick(yv)
            );
        }
        let _ = write!(
            self.body,
            r#"<text x="{:.1}" y="{:.1}" font-size="13" text-anchor="middle">{}</text>"#,
            W / 2.0,
            H - 16.0,
            escape(xlabel)
        );
        let _ = write!(
            self.body,
            r#"<text x="16" y="{:.1}" font-size="13" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
            H / 2.0,
            H / 2.0,
            escape(ylabel)
        );
    }

    fn polyline(&mut self, pts: &[(f64, f64)], color: &str, dashed: bool) {
        let coords: Vec<String> =
            pts.iter().filter(|(x, y)| x.is_finite() && y.is_finite()).map(|(x, y)| format!("{:.2},{:.2}", self.px(*x), self.py(*y))).collect();
        let dash = if dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = write!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
            coords.join(" ")
        );
    }

    fn marker(&mut self, x: f64, y: f64, color: &str) {
        let _ = write!(self.body, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, self.px(x), self.py(y));
    }

    fn label(&mut self, text: &str) {
        let _ = write!(
            self.body,
            r#"<text x="{:.1}" y="{:.1}" font-size="13">{}</text>"#,
            MARGIN + 10.0,
            MARGIN + 18.0,
            escape(text)
        );
    }

    fn finish(self, title: &str) -> String {
        format!(
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}"><title>{}</title><rect width="100%" height="100%" fill="white"/>{}</svg>
"#,
            escape(title),
            self.body
        )
    }
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn range(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)))
}

fn column(header: &[String], name: &str) -> Result<usize, String> {
    header.iter().position(|h| h == name).ok_or_else(|| format!("missing column {name:?}"))
}

/// `log|I_τ|` against τ with the fitted line over its window.
pub fn slope_svg(csv: &str) -> Result<String, String> {
    let (header, rows) = read_numeric_csv(csv)?;
    let (it, ii) = (column(&header, "tau")?, column(&header, "indicator")?);
    let taus: Vec<f64> = rows.iter().map(|r| r[it]).collect();
    let values: Vec<f64> = rows.iter().map(|r| r[ii]).collect();
    if taus.iter().any(|t| !t.is_finite()) {
        return Err("tau column has empty cells".into());
    }
    let logs: Vec<(f64, f64)> =
        taus.iter().zip(&values).filter(|(_, v)| v.abs() > 1e-300).map(|(t, v)| (*t, v.abs().ln())).collect();
    if logs.is_empty() {
        return Err("no indicator values above the numeric floor".into());
    }
    let mut c = Canvas::new(range(taus.iter().copied()), range(logs.iter().map(|p| p.1)));
    c.axes("tau", "log|I|");
    for (x, y) in &logs {
        c.marker(*x, *y, PALETTE[0]);
    }
    let note = match extract_length_with(&taus, &values, FitOptions::default()) {
        Ok(fit) => {
            let line: Vec<(f64, f64)> = (0..=50)
                .map(|k| {
                    let t = fit.window[0] + (fit.window[1] - fit.window[0]) * k as f64 / 50.0;
                    (t, -2.0 * fit.l_hat * t + fit.p_hat * t.ln() + fit.c_hat)
                })
                .collect();
            c.polyline(&line, PALETTE[1], false);
            format!("L̂ = {:.6}  p̂ = {:.3}  window [{:.3}, {:.3}]", fit.l_hat, fit.p_hat, fit.window[0], fit.window[1])
        }
        Err(e) => format!("fit failed: {e}"),
    };
    c.label(&note);
    Ok(c.finish("indicator slope"))
}

/// `u(t)` at up to eight trace nodes.
pub fn trace_svg(csv: &str) -> Result<String, String> {
    let (header, rows) = read_numeric_csv(csv)?;
    let it = column(&header, "t")?;
    let cols: Vec<usize> = (0..header.len()).filter(|&i| i != it).take(PALETTE.len()).collect();
    if cols.is_empty() {
        return Err("no trace columns".into());
    }
    let y = range(rows.iter().flat_map(|r| cols.iter().map(move |&c| r[c])));
    let mut c = Canvas::new(range(rows.iter().map(|r| r[it])), y);
    c.axes("t", "u");
    for (k, &col) in cols.iter().enumerate() {
        let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r[it], r[col])).collect();
        c.polyline(&pts, PALETTE[k], false);
    }
    c.label(&format!("{} of {} nodes", cols.len(), header.len() - 1));
    Ok(c.finish("traces"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    X1,
    X2,
    X3,
}

impl Plane {
    fn axes(self) -> (usize, usize, usize) {
        match self {
            Plane::X1 => (1, 2, 0),
            Plane::X2 => (0, 2, 1),
            Plane::X3 => (0, 1, 2),
        }
    }
}

/// Raster of the enclosure predicate on the plane `x_axis = at`, read from a
/// survey `probes.csv`, with the inclusion outline when recorded.
pub fn enclosure_slice_svg(csv: &str, plane: Plane, at: f64) -> Result<String, String> {
    let background: Background = match comment_value(csv, "background") {
        Some(s) => serde_json::from_str(s).map_err(|e| format!("background: {e}"))?,
        None => Background::Homogeneous,
    };
    let inclusion: Option<Region> = match comment_value(csv, "inclusion") {
        Some(s) => serde_json::from_str(s).map_err(|e| format!("inclusion: {e}"))?,
        None => None,
    };
    let (header, rows) = read_numeric_csv(csv)?;
    let idx = ["center_x1", "center_x2", "center_x3", "radius", "l_hat"].map(|n| column(&header, n));
    let [c1, c2, c3, cr, cl] = idx;
    let (c1, c2, c3, cr, cl) = (c1?, c2?, c3?, cr?, cl?);
    let probes: Vec<ProbeResult> = rows
        .iter()
        .map(|r| ProbeResult { center: Point3::new(r[c1], r[c2], r[c3]), radius: r[cr], l_hat: r[cl], background })
        .collect();
    if probes.iter().any(|p| !(p.center.is_finite() && p.radius.is_finite() && p.l_hat.is_finite())) {
        return Err("probe rows must be complete".into());
    }
    let enclosure = Enclosure::new(probes.clone(), background);
    let (a, b, n) = plane.axes();
    let ra = range(probes.iter().flat_map(|p| [p.center[a] - p.radius, p.center[a] + p.radius]));
    let rb = range(probes.iter().flat_map(|p| [p.center[b] - p.radius, p.center[b] + p.radius]));
    let mut c = Canvas::new(ra, rb);
    let cells = 96;
    let (da, db) = ((c.x.1 - c.x.0) / cells as f64, (c.y.1 - c.y.0) / cells as f64);
    for i in 0..cells {
        for j in 0..cells {
            let mut x = [0.0; 3];
            x[a] = c.x.0 + (i as f64 + 0.5) * da;
            x[b] = c.y.0 + (j as f64 + 0.5) * db;
            x[n] = at;
            if enclosure.contains(Point3::new(x[0], x[1], x[2])) {
                let (px, py) = (c.px(x[a] - 0.5 * da), c.py(x[b] + 0.5 * db));
                let (w, h) = (c.px(x[a] + 0.5 * da) - px, c.py(x[b] - 0.5 * db) - py);
                let _ = write!(c.body, r##"<rect x="{px:.2}" y="{py:.2}" width="{w:.2}" height="{h:.2}" fill="#9ecae1"/>"##);
            }
        }
    }
    for p in &probes {
        let d = (p.center[n] - at).abs();
        if d < p.radius {
            let r = (p.radius * p.radius - d * d).sqrt();
            circle(&mut c, p.center[a], p.center[b], r, "#d62728");
        }
    }
    if let Some(region) = &inclusion {
        outline(&mut c, region, (a, b, n), at);
    }
    c.axes(&format!("x{}", a + 1), &format!("x{}", b + 1));
    c.label(&format!("enclosure slice x{} = {at}; {} probes", n + 1, probes.len()));
    Ok(c.finish("enclosure slice"))
}

fn circle(c: &mut Canvas, x: f64, y: f64, r: f64, color: &str) {
    let pts: Vec<(f64, f64)> = (0..=96)
        .map(|k| {
            let t = k as f64 / 96.0 * std::f64::consts::TAU;
            (x + r * t.cos(), y + r * t.sin())
        })
        .collect();
    c.polyline(&pts, color, false);
}

fn outline(c: &mut Canvas, region: &Region, (a, b, n): (usize, usize, usize), at: f64) {
    match region {
        Region::Ball { center, radius } => {
            let d = (center[n] - at).abs();
            if d < *radius {
                circle(c, center[a], center[b], (radius * radius - d * d).sqrt(), "#000");
            }
        }
        Region::Box { min, max } => {
            if min[n] < at && at < max[n] {
                let pts = [(min[a], min[b]), (max[a], min[b]), (max[a], max[b]), (min[a], max[b]), (min[a], min[b])];
                c.polyline(&pts, "#000", false);
            }
        }
        Region::Union { parts } => parts.iter().for_each(|p| outline(c, p, (a, b, n), at)),
    }
}
