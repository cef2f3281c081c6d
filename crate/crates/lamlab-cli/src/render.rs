//! Deterministic SVG output for laminations, plane trees and lattice paths.

use std::fmt::Write as _;

use lamlab::lamination::{circle_point, Lamination};
use lamlab::plane_tree::{LatticePath, PlaneTree};

#[derive(Debug, Clone, PartialEq)]
pub struct RenderSpec {
    pub width: u32,
    pub stroke_width: f64,
    /// Chords shorter than this (Euclidean, unit circle) are not drawn.
    pub min_extent: f64,
    pub labels: bool,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self { width: 512, stroke_width: 1.0, min_extent: 0.0, labels: false }
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RenderError {
    #[error("width must be at least 64 pixels, got {0}")]
    Width(u32),
    #[error("minimal chord extent must be nonnegative, got {0}")]
    Extent(f64),
    #[error("stroke width must be positive, got {0}")]
    Stroke(f64),
}

impl RenderSpec {
    pub fn validate(&self) -> Result<(), RenderError> {
        if self.width < 64 {
            return Err(RenderError::Width(self.width));
        }
        if !(self.min_extent >= 0.0) {
            return Err(RenderError::Extent(self.min_extent));
        }
        if !(self.stroke_width > 0.0) {
            return Err(RenderError::Stroke(self.stroke_width));
        }
        Ok(())
    }
}

/// Three decimals, with negative zero printed as `0.000`.
fn num(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn header(out: &mut String, w: u32, h: u32) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
}

pub fn render_lamination(l: &Lamination, spec: &RenderSpec) -> String {
    let w = spec.width;
    let half = w as f64 / 2.0;
    let radius = half - 8.0;
    let to_px = |p: [f64; 2]| (half + radius * p[0], half - radius * p[1]);
    let mut out = String::new();
    header(&mut out, w, w);
    let _ = writeln!(
        out,
        r#"<circle cx="{}" cy="{}" r="{}" fill="none" stroke="black" stroke-width="{}"/>"#,
        num(half),
        num(half),
        num(radius),
        num(spec.stroke_width)
    );
    let den = l.den();
    for c in l.chords() {
        if c.is_degenerate(den) || c.length(den) < spec.min_extent {
            continue;
        }
        let (x0, y0) = to_px(circle_point(c.a, den));
        let (x1, y1) = to_px(circle_point(c.b, den));
        let _ = writeln!(
            out,
            r#"<path d="M {} {} L {} {}" stroke="black" stroke-width="{}"/>"#,
            num(x0),
            num(y0),
            num(x1),
            num(y1),
            num(spec.stroke_width)
        );
        if spec.labels {
            if let Some(label) = c.label {
                let _ = writeln!(
                    out,
                    r#"<text x="{}" y="{}" font-size="12" fill="blue">{label}</text>"#,
                    num((x0 + x1) / 2.0),
                    num((y0 + y1) / 2.0)
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Vertices at their height, leaves evenly spaced in depth-first order and
/// internal vertices centred over their children.
pub fn render_tree(t: &PlaneTree, spec: &RenderSpec) -> String {
    let n = t.n();
    let heights = t.heights();
    let h = t.height().max(1) as f64;
    let mut xs = vec![0.0; n];
    let leaves = (0..n).filter(|&v| t.is_leaf(v)).count().max(1) as f64;
    let mut next_leaf = 0.0;
    // Preorder indices: children come after parents, so a reverse sweep sees
    // every child before its parent.
    for v in 0..n {
        if t.is_leaf(v) {
            xs[v] = (next_leaf + 0.5) / leaves;
            next_leaf += 1.0;
        }
    }
    for v in (0..n).rev() {
        let kids = t.children(v);
        if !kids.is_empty() {
            xs[v] = (xs[kids[0]] + xs[kids[kids.len() - 1]]) / 2.0;
        }
    }
    let w = spec.width as f64;
    let margin = 12.0;
    let px = |v: usize| (margin + xs[v] * (w - 2.0 * margin), margin + heights[v] as f64 / h * (w - 2.0 * margin));
    let mut out = String::new();
    header(&mut out, spec.width, spec.width);
    for v in 0..n {
        if let Some(p) = t.parent(v) {
            let (x0, y0) = px(p);
            let (x1, y1) = px(v);
            let _ = writeln!(
                out,
                r#"<path d="M {} {} L {} {}" stroke="black" stroke-width="{}"/>"#,
                num(x0),
                num(y0),
                num(x1),
                num(y1),
                num(spec.stroke_width)
            );
        }
    }
    let r = (2.0 * spec.stroke_width).max(1.0);
    for v in 0..n {
        let (x, y) = px(v);
        let _ = writeln!(out, r#"<circle cx="{}" cy="{}" r="{}" fill="black"/>"#, num(x), num(y), num(r));
        if spec.labels {
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-size="10" fill="blue">{v}</text>"#,
                num(x + r + 1.0),
                num(y)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

pub fn render_path(p: &LatticePath, spec: &RenderSpec) -> String {
    let w = spec.width as f64;
    let hgt = (spec.width / 2).max(64);
    let margin = 8.0;
    let lo = p.values.iter().cloned().fold(f64::INFINITY, f64::min).min(0.0);
    let hi = p.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max).max(0.0);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let m = p.values.len().saturating_sub(1).max(1) as f64;
    let px = |i: usize, v: f64| {
        (
            margin + i as f64 / m * (w - 2.0 * margin),
            margin + (hi - v) / span * (hgt as f64 - 2.0 * margin),
        )
    };
    let mut out = String::new();
    header(&mut out, spec.width, hgt);
    let (zx0, zy) = px(0, 0.0);
    let (zx1, _) = px(p.values.len().saturating_sub(1), 0.0);
    let _ = writeln!(
        out,
        r##"<path d="M {} {} L {} {}" stroke="#999999" stroke-width="{}"/>"##,
        num(zx0),
        num(zy),
        num(zx1),
        num(zy),
        num(spec.stroke_width / 2.0)
    );
    let points: Vec<String> = p
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let (x, y) = px(i, v);
            format!("{},{}", num(x), num(y))
        })
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" stroke="black" stroke-width="{}"/>"#,
        points.join(" "),
        num(spec.stroke_width)
    );
    out.push_str("</svg>\n");
    out
}
