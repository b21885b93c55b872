//! Minimal deterministic SVG charts: multi-panel line plots and plan views
//! of a frame colored by vertical displacement.

use std::fmt::Write;

use crate::frame::GridModel;

pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
    pub color: &'static str,
    pub dashed: bool,
}

pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

const PANEL_W: f64 = 460.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 45.0;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 {
        "0".into()
    } else if !(1e-2..1e4).contains(&a) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * lo.abs().max(hi.abs()).max(1e-300) {
        let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn open(out: &mut String, width: f64, height: f64) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
}

fn draw_panel(out: &mut String, panel: &Panel, ox: f64, oy: f64) {
    let finite = |p: &&(f64, f64)| p.0.is_finite() && p.1.is_finite();
    let all: Vec<(f64, f64)> = panel.series.iter().flat_map(|s| s.points.iter().filter(finite).copied()).collect();
    let (x0, x1) = extent(all.iter().map(|p| p.0));
    let (y0, y1) = extent(all.iter().map(|p| p.1));
    let (pw, ph) = (PANEL_W - MARGIN_L - MARGIN_R, PANEL_H - MARGIN_T - MARGIN_B);
    let (left, top) = (ox + MARGIN_L, oy + MARGIN_T);
    let sx = |x: f64| left + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| top + ph - (y - y0) / (y1 - y0) * ph;

    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="13">{}</text>"#,
        left + pw / 2.0,
        oy + 18.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{left:.2}" y="{top:.2}" width="{pw:.2}" height="{ph:.2}" fill="none" stroke="#444"/>"##
    );
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let (xv, yv) = (x0 + f * (x1 - x0), y0 + f * (y1 - y0));
        let (px, py) = (sx(xv), sy(yv));
        let _ = writeln!(
            out,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#444"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"##,
            top + ph,
            top + ph + 4.0,
            top + ph + 16.0,
            tick_label(xv)
        );
        let _ = writeln!(
            out,
            r##"<line x1="{:.2}" y1="{py:.2}" x2="{left:.2}" y2="{py:.2}" stroke="#444"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"##,
            left - 4.0,
            left - 6.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        left + pw / 2.0,
        top + ph + 34.0,
        escape(&panel.x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
        ox + 14.0,
        top + ph / 2.0,
        ox + 14.0,
        top + ph / 2.0,
        escape(&panel.y_label)
    );
    for (k, s) in panel.series.iter().enumerate() {
        let pts: Vec<String> =
            s.points.iter().filter(finite).map(|&(x, y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        if !pts.is_empty() {
            let dash = if s.dashed { r#" stroke-dasharray="5,3""# } else { "" };
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{}"/>"#,
                s.color,
                pts.join(" ")
            );
        }
        if !s.name.is_empty() {
            let ly = top + 12.0 + 14.0 * k as f64;
            let _ = writeln!(
                out,
                r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
                left + pw - 110.0,
                ly,
                left + pw - 90.0,
                ly,
                s.color,
                left + pw - 86.0,
                ly + 4.0,
                escape(&s.name)
            );
        }
    }
}

/// Panels laid out in rows of `columns`.
pub fn line_panels(panels: &[Panel], columns: usize) -> String {
    let columns = columns.max(1);
    let rows = panels.len().div_ceil(columns).max(1);
    let (w, h) = (PANEL_W * columns.min(panels.len().max(1)) as f64, PANEL_H * rows as f64);
    let mut out = String::new();
    open(&mut out, w, h);
    for (k, p) in panels.iter().enumerate() {
        draw_panel(&mut out, p, PANEL_W * (k % columns) as f64, PANEL_H * (k / columns) as f64);
    }
    out.push_str("</svg>\n");
    out
}

/// Blue for 0 through to red for 1.
fn color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let r = (40.0 + 215.0 * t).round() as u8;
    let g = (80.0 + 100.0 * (1.0 - (2.0 * t - 1.0).abs())).round() as u8;
    let b = (40.0 + 215.0 * (1.0 - t)).round() as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Plan view of `model`; members colored by the mean absolute vertical
/// displacement of their end nodes.
pub fn displacement_plan(model: &GridModel, dz: &[f64], title: &str) -> String {
    let (w, h) = (640.0, 480.0);
    let (left, top, pw, ph) = (40.0, 40.0, 480.0, 400.0);
    let (x0, x1) = extent(model.nodes.iter().map(|p| p.x));
    let (y0, y1) = extent(model.nodes.iter().map(|p| p.y));
    let scale = (pw / (x1 - x0)).min(ph / (y1 - y0));
    let px = |x: f64| left + (x - x0) * scale;
    let py = |y: f64| top + ph - (y - y0) * scale;
    let mag: Vec<f64> = dz.iter().map(|v| v.abs()).collect();
    let dmax = mag.iter().copied().fold(0.0, f64::max);
    let norm = |v: f64| if dmax > 0.0 { v / dmax } else { 0.0 };

    let mut out = String::new();
    open(&mut out, w, h);
    let _ = writeln!(out, r#"<text x="{:.2}" y="22" text-anchor="middle" font-size="13">{}</text>"#, w / 2.0, escape(title));
    for e in &model.elements {
        let [i, j] = e.nodes;
        let (a, b) = (model.nodes[i], model.nodes[j]);
        let _ = writeln!(
            out,
            r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{}" stroke-width="3" stroke-linecap="round"/>"#,
            px(a.x),
            py(a.y),
            px(b.x),
            py(b.y),
            color(norm(0.5 * (mag[i] + mag[j])))
        );
    }
    for (k, p) in model.nodes.iter().enumerate() {
        if model.supports[k].iter().any(|&r| r) {
            let _ = writeln!(
                out,
                r##"<rect x="{:.2}" y="{:.2}" width="5" height="5" fill="#222"/>"##,
                px(p.x) - 2.5,
                py(p.y) - 2.5
            );
        }
    }
    let (bx, by, bh) = (w - 80.0, top, ph);
    for k in 0..50 {
        let t = 1.0 - k as f64 / 49.0;
        let _ = writeln!(
            out,
            r#"<rect x="{bx:.2}" y="{:.2}" width="16" height="{:.2}" fill="{}"/>"#,
            by + bh * k as f64 / 50.0,
            bh / 50.0 + 0.5,
            color(t)
        );
    }
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">{}</text>"#, bx + 20.0, by + 8.0, tick_label(dmax));
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}">0</text>"#, bx + 20.0, by + bh);
    let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">|dz| (m)</text>"#, bx + 8.0, by + bh + 20.0);
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_series_still_render() {
        let p = Panel {
            title: "a < b".into(),
            x_label: "x".into(),
            y_label: "y".into(),
            series: vec![Series { name: "s".into(), points: vec![(1.0, 2.0), (f64::INFINITY, 1.0)], color: PALETTE[0], dashed: false }],
        };
        let svg = line_panels(&[p], 2);
        assert!(svg.contains("a &lt; b"));
        assert!(!svg.contains("NaN") && !svg.contains("inf"));
    }
}
