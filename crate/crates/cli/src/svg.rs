//! Minimal SVG writer with a fitted, y-up view box.

use crate::doc::Point;
use std::fmt::Write;

pub struct Layer {
    pub points: Vec<Point>,
    pub stroke: &'static str,
    pub width: f64,
    pub dashed: bool,
}

pub struct Marker {
    pub at: Point,
    /// Optional arrow direction.
    pub dir: Option<Point>,
    pub color: &'static str,
}

#[derive(Default)]
pub struct Figure {
    pub layers: Vec<Layer>,
    pub markers: Vec<Marker>,
}

impl Figure {
    pub fn polyline(&mut self, points: Vec<Point>, stroke: &'static str, width: f64) {
        self.layers.push(Layer {
            points,
            stroke,
            width,
            dashed: false,
        });
    }

    pub fn dashed(&mut self, points: Vec<Point>, stroke: &'static str, width: f64) {
        self.layers.push(Layer {
            points,
            stroke,
            width,
            dashed: true,
        });
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        let all = self
            .layers
            .iter()
            .flat_map(|l| l.points.iter())
            .chain(self.markers.iter().map(|m| &m.at));
        for p in all.filter(|p| p[0].is_finite() && p[1].is_finite()) {
            b = (b.0.min(p[0]), b.1.min(p[1]), b.2.max(p[0]), b.3.max(p[1]));
        }
        if !b.0.is_finite() {
            return (-1.0, -1.0, 1.0, 1.0);
        }
        b
    }

    pub fn render(&self) -> String {
        let (x0, y0, x1, y1) = self.bounds();
        let w = (x1 - x0).max(1e-9);
        let h = (y1 - y0).max(1e-9);
        let (mx, my) = (0.05 * w, 0.05 * h);
        let (vx, vy, vw, vh) = (x0 - mx, -(y1 + my), w + 2.0 * mx, h + 2.0 * my);
        let unit = vw.max(vh) / 400.0;
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vx} {vy} {vw} {vh}" width="600" height="{}">"#,
            (600.0 * vh / vw).round()
        );
        let _ = writeln!(s, r#"<g transform="scale(1,-1)" fill="none" stroke-linejoin="round">"#);
        for l in &self.layers {
            let pts: Vec<String> = l.points.iter().map(|p| format!("{},{}", p[0], p[1])).collect();
            let dash = if l.dashed {
                format!(r#" stroke-dasharray="{} {}""#, 4.0 * unit, 3.0 * unit)
            } else {
                String::new()
            };
            let _ = writeln!(
                s,
                r#"<polyline points="{}" stroke="{}" stroke-width="{}"{dash}/>"#,
                pts.join(" "),
                l.stroke,
                l.width * unit
            );
        }
        for m in &self.markers {
            let _ = writeln!(
                s,
                r#"<circle cx="{}" cy="{}" r="{}" fill="{}" stroke="none"/>"#,
                m.at[0],
                m.at[1],
                3.0 * unit,
                m.color
            );
            if let Some(d) = m.dir {
                let len = d[0].hypot(d[1]);
                if len > 0.0 {
                    let k = 40.0 * unit / len;
                    let _ = writeln!(
                        s,
                        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="{}" stroke-width="{}"/>"#,
                        m.at[0],
                        m.at[1],
                        m.at[0] + k * d[0],
                        m.at[1] + k * d[1],
                        m.color,
                        1.5 * unit
                    );
                }
            }
        }
        s.push_str("</g>\n</svg>\n");
        s
    }
}

pub const PALETTE: [&str; 6] = ["#1f4e9c", "#c0392b", "#2e8b57", "#8e44ad", "#d35400", "#16a085"];
