//! Fixed-layout SVG: an 800 x 800 viewport with the unit disk 760 px across.

use brachisto_core::{CartPoint, SampledCurve, ValueGrid};
use std::fmt::Write as _;

const SIZE: f64 = 800.0;
const SCALE: f64 = 380.0;
const CONTOUR_LEVELS: usize = 12;

fn px(p: CartPoint) -> (f64, f64) {
    (SIZE / 2.0 + SCALE * p.x, SIZE / 2.0 - SCALE * p.y)
}

pub struct Svg {
    body: String,
}

impl Svg {
    pub fn new() -> Self {
        let mut body = String::new();
        let _ = writeln!(body, r##"<rect width="800" height="800" fill="#ffffff"/>"##);
        Svg { body }
    }

    pub fn disk(&mut self, epsilon: f64) -> &mut Self {
        let _ = writeln!(
            self.body,
            r##"<circle cx="400" cy="400" r="380" fill="none" stroke="#000000" stroke-width="1.5"/>"##
        );
        if epsilon > 0.0 {
            let _ = writeln!(
                self.body,
                r##"<circle cx="400" cy="400" r="{:.2}" fill="#dddddd" stroke="#000000" stroke-width="1.5"/>"##,
                SCALE * epsilon
            );
        }
        self
    }

    pub fn curve(&mut self, c: &SampledCurve, color: &str) -> &mut Self {
        let mut d = String::new();
        for (k, p) in c.points().enumerate() {
            let (x, y) = px(p);
            let _ = write!(d, "{}{x:.2} {y:.2}", if k == 0 { "M" } else { " L" });
        }
        let _ = writeln!(self.body, r#"<path d="{d}" fill="none" stroke="{color}" stroke-width="1.2"/>"#);
        self
    }

    pub fn dot(&mut self, p: CartPoint, color: &str) -> &mut Self {
        let (x, y) = px(p);
        let _ = writeln!(self.body, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
        self
    }

    /// Level sets of `v` at 12 evenly spaced interior levels.
    pub fn contours(&mut self, v: &ValueGrid) -> &mut Self {
        let lo = v.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for k in 0..CONTOUR_LEVELS {
            let level = lo + (hi - lo) * (k as f64 + 0.5) / CONTOUR_LEVELS as f64;
            let mut d = String::new();
            for (a, b) in marching_squares(v, level) {
                let ((x0, y0), (x1, y1)) = (px(a), px(b));
                let _ = write!(d, "M{x0:.2} {y0:.2} L{x1:.2} {y1:.2} ");
            }
            let _ = writeln!(
                self.body,
                r##"<path d="{}" fill="none" stroke="#888888" stroke-width="0.8"/>"##,
                d.trim_end()
            );
        }
        self
    }

    pub fn finish(&self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"800\" height=\"800\" viewBox=\"0 0 800 800\">\n{}</svg>\n",
            self.body
        )
    }
}

/// Segments of the level set `V = level`, cell by cell in grid-index space,
/// mapped to the plane through the polar node positions.
pub fn marching_squares(v: &ValueGrid, level: f64) -> Vec<(CartPoint, CartPoint)> {
    let mut out = Vec::new();
    // Corner order: (i, j), (i, j+1), (i+1, j+1), (i+1, j).
    let corner = |i: usize, j: usize, c: usize| match c {
        0 => (i, j),
        1 => (i, j + 1),
        2 => (i + 1, j + 1),
        _ => (i + 1, j),
    };
    for i in 0..v.n_r - 1 {
        for j in 0..v.n_theta {
            let vals: Vec<f64> = (0..4)
                .map(|c| {
                    let (a, b) = corner(i, j, c);
                    v.value(a, b)
                })
                .collect();
            let mask = (0..4).fold(0, |m, c| m | (usize::from(vals[c] > level) << c));
            if mask == 0 || mask == 15 {
                continue;
            }
            let cross = |e: usize| -> CartPoint {
                let (c0, c1) = (e, (e + 1) % 4);
                let (v0, v1) = (vals[c0], vals[c1]);
                let t = if v1 != v0 { ((level - v0) / (v1 - v0)).clamp(0.0, 1.0) } else { 0.5 };
                let (a0, b0) = corner(i, j, c0);
                let (a1, b1) = corner(i, j, c1);
                let r = v.radius(a0) + t * (v.radius(a1) - v.radius(a0));
                let th0 = v.angle(b0);
                let th1 = th0 + (b1 as f64 - b0 as f64) * std::f64::consts::TAU / v.n_theta as f64;
                CartPoint::from_polar(r, th0 + t * (th1 - th0))
            };
            // Edges crossed, paired in order; saddles split by the cell mean.
            let edges: Vec<usize> =
                (0..4).filter(|&e| (mask >> e & 1) != (mask >> ((e + 1) % 4) & 1)).collect();
            if edges.len() == 2 {
                out.push((cross(edges[0]), cross(edges[1])));
            } else {
                let mean = vals.iter().sum::<f64>() / 4.0;
                let corner0_high = mask & 1 == 1;
                if (mean > level) == corner0_high {
                    out.push((cross(0), cross(1)));
                    out.push((cross(2), cross(3)));
                } else {
                    out.push((cross(3), cross(0)));
                    out.push((cross(1), cross(2)));
                }
            }
        }
    }
    out
}
