//! CSV and SVG output for range and curve samples.

use std::fmt::Write as _;

use csv::{Terminator, WriterBuilder};
use serde::Serialize;

use hyprep_core::numrange::{BoundarySample, CurvePoint};

const SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;

#[derive(Serialize)]
struct BoundaryRow {
    theta: f64,
    h: f64,
    x: f64,
    y: f64,
}

fn to_csv<T: Serialize>(rows: impl IntoIterator<Item = T>) -> Result<String, String> {
    let mut w = WriterBuilder::new().terminator(Terminator::Any(b'\n')).from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| e.to_string())?;
    }
    let bytes = w.into_inner().map_err(|e| e.to_string())?;
    String::from_utf8(bytes).map_err(|e| e.to_string())
}

pub fn boundary_csv(s: &BoundarySample) -> Result<String, String> {
    to_csv(s.angles.iter().zip(&s.support).zip(&s.points).map(|((theta, h), p)| BoundaryRow {
        theta: *theta,
        h: *h,
        x: p[0],
        y: p[1],
    }))
}

pub fn curve_csv(points: &[CurvePoint]) -> Result<String, String> {
    to_csv(points.iter())
}

/// Maps data coordinates into the drawing square, y pointing up.
struct Frame {
    cx: f64,
    cy: f64,
    scale: f64,
}

impl Frame {
    fn fit(points: impl Iterator<Item = (f64, f64)>) -> Self {
        let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for (x, y) in points {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
        let span = (x1 - x0).max(y1 - y0);
        let scale = if span.is_finite() && span > 0.0 { (SIZE - 2.0 * MARGIN) / span } else { 1.0 };
        let mid = |a: f64, b: f64| if a.is_finite() { 0.5 * (a + b) } else { 0.0 };
        Self { cx: mid(x0, x1), cy: mid(y0, y1), scale }
    }

    fn map(&self, x: f64, y: f64) -> (f64, f64) {
        (SIZE / 2.0 + (x - self.cx) * self.scale, SIZE / 2.0 - (y - self.cy) * self.scale)
    }
}

fn header() -> String {
    format!("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n")
}

pub fn boundary_svg(s: &BoundarySample) -> String {
    let frame = Frame::fit(s.points.iter().map(|p| (p[0], p[1])));
    let mut out = header();
    out.push_str("<polygon fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"");
    for p in &s.points {
        let (x, y) = frame.map(p[0], p[1]);
        let _ = write!(out, "{x:.3},{y:.3} ");
    }
    out.push_str("\"/>\n</svg>\n");
    out
}

pub fn curve_svg(points: &[CurvePoint]) -> String {
    let frame = Frame::fit(points.iter().map(|p| (p.x, p.y)));
    let mut out = header();
    for p in points {
        let (x, y) = frame.map(p.x, p.y);
        let _ = writeln!(out, "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"1\"/>");
    }
    out.push_str("</svg>\n");
    out
}
