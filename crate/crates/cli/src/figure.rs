//! Static SVG figure: K against the sweep parameter with the LGI-violating
//! regions shaded, plus bar charts of the distribution at selected points.
//!
//! Output is deterministic (fixed-precision coordinates, no timestamps) so
//! it can be compared against a stored golden file.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::IoError;
use crate::run::{PointRecord, RunReport};

/// Default highlighted points. These are representative choices (one inside
/// a violation band, two outside), not values read off the original figure.
pub const REPRESENTATIVE_POINTS: [f64; 3] = [FRAC_PI_4, 3.0 * FRAC_PI_4, 5.0 * FRAC_PI_4];

const PANEL_W: f64 = 480.0;
const PANEL_H: f64 = 340.0;
const MARGIN_L: f64 = 62.0;
const MARGIN_R: f64 = 18.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 46.0;

const MARKERS: [(&str, &str); 3] = [("circle", "#2ca02c"), ("square", "#ff7f0e"), ("triangle", "#9467bd")];
const POSITIVE_FILL: &str = "#4c78a8";
const NEGATIVE_FILL: &str = "#d62728";
const BAND_FILL: &str = "#f2c14e";

struct Frame {
    x0: f64,
    y0: f64,
    xmin: f64,
    xmax: f64,
    ymin: f64,
    ymax: f64,
}

impl Frame {
    fn new(col: usize, row: usize, (xmin, xmax): (f64, f64), (ymin, ymax): (f64, f64)) -> Self {
        Self { x0: col as f64 * PANEL_W, y0: row as f64 * PANEL_H, xmin, xmax, ymin, ymax }
    }

    fn left(&self) -> f64 {
        self.x0 + MARGIN_L
    }

    fn right(&self) -> f64 {
        self.x0 + PANEL_W - MARGIN_R
    }

    fn top(&self) -> f64 {
        self.y0 + MARGIN_T
    }

    fn bottom(&self) -> f64 {
        self.y0 + PANEL_H - MARGIN_B
    }

    fn x(&self, v: f64) -> f64 {
        self.left() + (v - self.xmin) / (self.xmax - self.xmin) * (self.right() - self.left())
    }

    fn y(&self, v: f64) -> f64 {
        self.bottom() - (v - self.ymin) / (self.ymax - self.ymin) * (self.bottom() - self.top())
    }

    fn axes(&self, out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
        let (l, r, t, b) = (self.left(), self.right(), self.top(), self.bottom());
        let _ = writeln!(out, r##"<rect x="{l:.2}" y="{t:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333"/>"##, r - l, b - t);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" class="title">{title}</text>"#, (l + r) / 2.0, self.y0 + 22.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xlabel}</text>"#, (l + r) / 2.0, b + 36.0);
        let (yx, yy) = (self.x0 + 16.0, (t + b) / 2.0);
        let _ = writeln!(out, r#"<text x="{yx:.2}" y="{yy:.2}" text-anchor="middle" transform="rotate(-90 {yx:.2} {yy:.2})">{ylabel}</text>"#);
    }

    fn x_tick(&self, out: &mut String, v: f64, label: &str) {
        let (x, b) = (self.x(v), self.bottom());
        let _ = writeln!(out, r##"<line x1="{x:.2}" y1="{b:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333"/>"##, b + 5.0);
        let _ = writeln!(out, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#, b + 18.0);
    }

    fn y_tick(&self, out: &mut String, v: f64, label: &str) {
        let (y, l) = (self.y(v), self.left());
        let _ = writeln!(out, r##"<line x1="{:.2}" y1="{y:.2}" x2="{l:.2}" y2="{y:.2}" stroke="#333"/>"##, l - 5.0);
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{label}</text>"#, l - 8.0, y + 4.0);
    }

    fn hline(&self, out: &mut String, v: f64, class: &str) {
        let y = self.y(v);
        let _ = writeln!(out, r#"<line x1="{:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" class="{class}"/>"#, self.left(), self.right());
    }
}

fn pi_label(v: f64) -> Option<String> {
    let halves = v / FRAC_PI_2;
    if (halves - halves.round()).abs() > 1e-9 {
        return None;
    }
    Some(match halves.round() as i64 {
        0 => "0".into(),
        1 => "π/2".into(),
        2 => "π".into(),
        n if n % 2 == 0 => format!("{}π", n / 2),
        n => format!("{n}π/2"),
    })
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.into() }
}

/// Pleasant tick spacing for a span.
fn tick_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 2.5, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag)
}

fn marker(out: &mut String, shape: &str, color: &str, x: f64, y: f64) {
    match shape {
        "circle" => {
            let _ = writeln!(out, r#"<circle cx="{x:.2}" cy="{y:.2}" r="6" fill="{color}" class="marker"/>"#);
        }
        "square" => {
            let _ = writeln!(out, r#"<rect x="{:.2}" y="{:.2}" width="11" height="11" fill="{color}" class="marker"/>"#, x - 5.5, y - 5.5);
        }
        _ => {
            let _ = writeln!(
                out,
                r#"<polygon points="{x:.2},{:.2} {:.2},{:.2} {:.2},{:.2}" fill="{color}" class="marker"/>"#,
                y - 7.0,
                x - 6.5,
                y + 5.0,
                x + 6.5,
                y + 5.0
            );
        }
    }
}

/// Parameter intervals of consecutive LGI-violating records, extended to
/// the midpoints with their neighbours.
pub fn violation_bands(records: &[PointRecord]) -> Vec<(f64, f64)> {
    let violated = |r: &PointRecord| r.lgi_violated == Some(true);
    let mut bands = Vec::new();
    let mut i = 0;
    while i < records.len() {
        if !violated(&records[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i < records.len() && violated(&records[i]) {
            i += 1;
        }
        let lo = if start == 0 { records[0].param } else { 0.5 * (records[start - 1].param + records[start].param) };
        let hi = if i == records.len() { records[i - 1].param } else { 0.5 * (records[i - 1].param + records[i].param) };
        bands.push((lo, hi));
    }
    bands
}

fn nearest(records: &[PointRecord], at: f64) -> Option<&PointRecord> {
    records.iter().min_by(|a, b| (a.param - at).abs().total_cmp(&(b.param - at).abs()))
}

fn k_panel(out: &mut String, records: &[PointRecord], highlights: &[&PointRecord]) {
    let ks: Vec<(f64, f64)> = records.iter().filter_map(|r| r.k.map(|k| (r.param, k))).collect();
    let xmin = records[0].param;
    let xmax = records[records.len() - 1].param;
    let kmin = ks.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let kmax = ks.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let frame = Frame::new(0, 0, (xmin, xmax), (kmin.min(-3.0) - 0.4, kmax.max(1.0) + 0.4));

    let _ = writeln!(out, r#"<g class="k-panel">"#);
    for (lo, hi) in violation_bands(records) {
        let (x1, x2) = (frame.x(lo), frame.x(hi));
        let _ = writeln!(
            out,
            r#"<rect x="{x1:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{BAND_FILL}" fill-opacity="0.45" class="band"/>"#,
            frame.top(),
            x2 - x1,
            frame.bottom() - frame.top()
        );
    }
    frame.axes(out, "LG parameter", "ωτ", "K");
    frame.hline(out, 1.0, "bound");
    frame.hline(out, -3.0, "bound");

    let pi_ticks: Vec<f64> = (0..=((xmax / FRAC_PI_2).floor() as i64)).map(|n| n as f64 * FRAC_PI_2).filter(|v| *v >= xmin - 1e-12).collect();
    if pi_ticks.len() >= 2 {
        for v in pi_ticks {
            frame.x_tick(out, v, &pi_label(v).unwrap_or_default());
        }
    } else {
        let step = tick_step(xmax - xmin);
        let mut v = (xmin / step).ceil() * step;
        while v <= xmax + 1e-12 {
            frame.x_tick(out, v, &tick_label(v));
            v += step;
        }
    }
    let mut v = frame.ymin.ceil();
    while v <= frame.ymax {
        frame.y_tick(out, v, &tick_label(v));
        v += 1.0;
    }

    let points: Vec<String> = ks.iter().map(|&(x, k)| format!("{:.2},{:.2}", frame.x(x), frame.y(k))).collect();
    let _ = writeln!(out, r#"<polyline points="{}" class="curve"/>"#, points.join(" "));
    for (r, (shape, color)) in highlights.iter().zip(MARKERS) {
        if let Some(k) = r.k {
            marker(out, shape, color, frame.x(r.param), frame.y(k));
        }
    }
    let _ = writeln!(out, "</g>");
}

fn qpd_panel(out: &mut String, slot: usize, record: &PointRecord, marker_style: Option<(&str, &str)>) {
    let weights = record.total_weights();
    let (col, row) = (slot % 2, slot / 2);
    let dmin = weights.first().map(|w| w.0).unwrap_or(-1.0);
    let dmax = weights.last().map(|w| w.0).unwrap_or(1.0);
    let spacing = weights.windows(2).map(|w| w[1].0 - w[0].0).fold(f64::INFINITY, f64::min);
    let spacing = if spacing.is_finite() { spacing } else { 1.0 };
    let wmin = weights.iter().map(|w| w.1).fold(0.0, f64::min);
    let wmax = weights.iter().map(|w| w.1).fold(0.0, f64::max);
    let pad = 0.1 * (wmax - wmin).max(1e-3);
    let frame = Frame::new(col, row, (dmin - 0.6 * spacing, dmax + 0.6 * spacing), (wmin - pad, wmax + pad));

    let _ = writeln!(out, r#"<g class="qpd-panel">"#);
    frame.axes(out, &format!("distribution at ωτ = {:.4}", record.param), "Δ", "P(Δ)");
    frame.hline(out, 0.0, "zero");
    if let Some((shape, color)) = marker_style {
        marker(out, shape, color, frame.right() - 14.0, frame.top() + 14.0);
    }
    let half = 0.35 * spacing;
    for &(delta, w) in &weights {
        let (x1, x2) = (frame.x(delta - half), frame.x(delta + half));
        let (ya, yb) = (frame.y(w.max(0.0)), frame.y(w.min(0.0)));
        let (fill, class) = if w < 0.0 { (NEGATIVE_FILL, "bar negative") } else { (POSITIVE_FILL, "bar") };
        let _ = writeln!(
            out,
            r#"<rect x="{x1:.2}" y="{ya:.2}" width="{:.2}" height="{:.2}" fill="{fill}" class="{class}"/>"#,
            x2 - x1,
            yb - ya
        );
        frame.x_tick(out, delta, &tick_label(delta));
    }
    let step = tick_step(frame.ymax - frame.ymin);
    let mut v = (frame.ymin / step).ceil() * step;
    while v <= frame.ymax + 1e-12 {
        frame.y_tick(out, v, &tick_label(v));
        v += step;
    }
    if weights.is_empty() {
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">no distribution recorded</text>"#, frame.x0 + PANEL_W / 2.0, frame.y0 + PANEL_H / 2.0);
    }
    let _ = writeln!(out, "</g>");
}

/// SVG source for a report. `at` selects distribution panels (nearest
/// records); empty means [`REPRESENTATIVE_POINTS`] within the sweep range.
pub fn render_svg(report: &RunReport, at: &[f64]) -> Result<String, IoError> {
    let records = &report.records;
    if records.is_empty() {
        return Err(IoError::EmptyReport);
    }
    let sweep = records.len() > 1 && records.iter().any(|r| r.k.is_some());
    let requested: Vec<f64> = if !at.is_empty() {
        at.to_vec()
    } else if records.len() == 1 {
        vec![records[0].param]
    } else {
        let (lo, hi) = (records[0].param, records[records.len() - 1].param);
        REPRESENTATIVE_POINTS.iter().copied().filter(|p| *p >= lo && *p <= hi).collect()
    };
    let highlights: Vec<&PointRecord> = requested.iter().filter_map(|&p| nearest(records, p)).take(3).collect();

    let panels = highlights.len() + usize::from(sweep);
    let cols = if panels > 1 { 2 } else { 1 };
    let rows = panels.div_ceil(2).max(1);
    let (width, height) = (cols as f64 * PANEL_W, rows as f64 * PANEL_H);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        out,
        "<style>.title{{font-size:14px;font-weight:bold}} .curve{{fill:none;stroke:#1f3b73;stroke-width:2}} \
         .bound{{stroke:#555;stroke-dasharray:6 4}} .zero{{stroke:#555}} .marker{{stroke:#222;stroke-width:1}}</style>"
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if sweep {
        k_panel(&mut out, records, &highlights);
    }
    for (n, r) in highlights.iter().enumerate() {
        let style = if sweep { MARKERS.get(n).copied() } else { None };
        qpd_panel(&mut out, n + usize::from(sweep), r, style);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn emit_figure(report: &RunReport, path: &Path, at: &[f64]) -> Result<(), IoError> {
    let svg = render_svg(report, at)?;
    fs::write(path, svg).map_err(|e| IoError::Write { path: path.to_path_buf(), source: e })
}
