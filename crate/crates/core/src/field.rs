//! The value function sampled from the solution foliation.
//!
//! Each leaf of the foliation carries its cumulative time of flight. Leaves
//! are resampled at a common count, neighbouring leaves are stitched into
//! triangles, and every grid node inside a triangle takes the linearly
//! interpolated time. Leaves are resampled uniformly in `t + arc length`, so a
//! vertex and its neighbour on the next leaf have nearly equal times and the
//! triangles stay close to right-angled. Rim nodes interpolate between leaf
//! ends on the rim; any node still uncovered takes an inverse-distance average
//! of covered nodes nearby.
//!
//! Only the upper half `theta >= 0` is built; the lower half is its mirror.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::Write as _;
use thiserror::Error;

use crate::annulus::{arc_time, descending_piece, exit_piece, tangent_params, AnnulusError};
use crate::geom::{format_sig, radial_antiderivative, CartPoint, SampledCurve};
use crate::strong::{d_from_rc, Branch, StrongError, StrongSolution, SECTOR_LIMIT};

/// Samples per half of a strong solution before resampling.
const DENSE: usize = 1200;

/// Vertices per leaf after resampling.
const LEAF_VERTICES: usize = 1201;

/// Exclusion bands for residual checks.
const R_LOW: f64 = 0.1;
const R_HIGH: f64 = 0.9;
const PI_BAND: f64 = 0.2;

/// Search radius, in grid cells, for nodes no triangle covers.
const FILL_CELLS: i64 = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FieldError {
    #[error("grid needs n_r, n_theta >= 16 and even n_theta, got {n_r} x {n_theta}")]
    InvalidGrid { n_r: usize, n_theta: usize },
    #[error("need at least 64 curves, got {0}")]
    TooFewCurves(usize),
    #[error("epsilon {0} outside [0, 1)")]
    InvalidEpsilon(f64),
    #[error("node (r = {r}, theta = {theta}) has no sample within {FILL_CELLS} cells")]
    InsufficientCoverage { r: f64, theta: f64 },
    #[error("only {0} interior nodes survive the exclusion bands, need 100")]
    GridTooCoarse(usize),
    #[error(transparent)]
    Strong(#[from] StrongError),
    #[error(transparent)]
    Annulus(#[from] AnnulusError),
}

/// Which family of curves supplied a node's value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Strong,
    Weak,
    Constrained,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Strong => "strong",
            Family::Weak => "weak",
            Family::Constrained => "constrained",
        }
    }
}

/// Minimal time of flight on the polar grid `r_i = eps + (1 - eps) i / (n_r - 1)`,
/// `theta_j = -pi + 2 pi j / n_theta`. Node `(i, j)` is stored at `i * n_theta + j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueGrid {
    pub epsilon: f64,
    pub n_r: usize,
    pub n_theta: usize,
    pub values: Vec<f64>,
    pub source_mask: Vec<Family>,
}

impl ValueGrid {
    pub fn radius(&self, i: usize) -> f64 {
        ring_radius(self.epsilon, self.n_r, i)
    }

    pub fn angle(&self, j: usize) -> f64 {
        -PI + TAU * j as f64 / self.n_theta as f64
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_theta + j.rem_euclid(self.n_theta)]
    }

    fn dr(&self) -> f64 {
        (1.0 - self.epsilon) / (self.n_r - 1) as f64
    }

    fn dtheta(&self) -> f64 {
        TAU / self.n_theta as f64
    }

    /// Bilinear interpolation in `(r, theta)`.
    pub fn interpolate(&self, r: f64, theta: f64) -> f64 {
        self.bilinear(r, theta, |i, j| self.value(i, j))
    }

    fn bilinear(&self, r: f64, theta: f64, f: impl Fn(usize, usize) -> f64) -> f64 {
        let x = ((r - self.epsilon) / self.dr()).clamp(0.0, (self.n_r - 1) as f64);
        let i = (x.floor() as usize).min(self.n_r - 2);
        let a = x - i as f64;
        let y = (theta.rem_euclid(TAU) + PI) / self.dtheta();
        let j = y.floor();
        let b = y - j;
        let j = j as usize;
        (1.0 - a) * ((1.0 - b) * f(i, j) + b * f(i, j + 1))
            + a * ((1.0 - b) * f(i + 1, j) + b * f(i + 1, j + 1))
    }

    /// CSV `r,theta,V,family`, rings outermost last.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,theta,V,family\n");
        for i in 0..self.n_r {
            for j in 0..self.n_theta {
                let id = i * self.n_theta + j;
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    format_sig(self.radius(i)),
                    format_sig(self.angle(j)),
                    format_sig(self.values[id]),
                    self.source_mask[id].name()
                );
            }
        }
        out
    }

    /// Cartesian `grad V` at node `(i, j)`: central differences inside,
    /// one-sided on the first and last ring.
    fn node_gradient(&self, i: usize, j: usize) -> CartPoint {
        let (lo, hi) = (i.saturating_sub(1), (i + 1).min(self.n_r - 1));
        let v_r = (self.value(hi, j) - self.value(lo, j)) / ((hi - lo) as f64 * self.dr());
        let r = self.radius(i);
        let v_t = (self.value(i, j + 1) - self.value(i, j + self.n_theta - 1)) / (2.0 * self.dtheta());
        let theta = self.angle(j);
        let (s, c) = theta.sin_cos();
        let g_t = if r > 0.0 { v_t / r } else { 0.0 };
        CartPoint::new(v_r * c - g_t * s, v_r * s + g_t * c)
    }
}

fn ring_radius(eps: f64, n_r: usize, i: usize) -> f64 {
    if i == n_r - 1 {
        1.0
    } else {
        eps + (1.0 - eps) * i as f64 / (n_r - 1) as f64
    }
}

/// Whether `(r, theta)` lies in a band excluded from residual checks.
pub fn excluded(r: f64, theta: f64) -> bool {
    !(R_LOW..=R_HIGH).contains(&r) || (theta.abs() - PI).abs() < PI_BAND
}

/// One curve of the foliation: positions and times, in the upper half plane.
#[derive(Debug, Clone)]
struct Leaf {
    family: Family,
    pts: Vec<CartPoint>,
    t: Vec<f64>,
}

/// Samples `(u, point, time)` of one piece, with the time at which it starts.
type Piece = (Vec<(f64, CartPoint, f64)>, f64);

impl Leaf {
    fn from_pieces(family: Family, pieces: &[Piece]) -> Leaf {
        let mut pts = Vec::new();
        let mut t = Vec::new();
        for (piece, t0) in pieces {
            let skip = usize::from(!pts.is_empty());
            for &(_, p, time) in &piece[skip..] {
                pts.push(p);
                t.push(t0 + time);
            }
        }
        Leaf { family, pts, t }
    }

    /// `m` vertices evenly spaced in `t + arc length`, by linear interpolation.
    fn resampled(&self, m: usize) -> Leaf {
        let mut u = Vec::with_capacity(self.pts.len());
        u.push(self.t[0]);
        for k in 1..self.pts.len() {
            let step = (self.t[k] - self.t[k - 1]) + self.pts[k].dist(self.pts[k - 1]);
            u.push(u[k - 1] + step);
        }
        let (u0, u1) = (u[0], u[u.len() - 1]);
        let mut pts = Vec::with_capacity(m);
        let mut t = Vec::with_capacity(m);
        let mut seg = 0;
        for k in 0..m {
            let target = u0 + (u1 - u0) * k as f64 / (m - 1) as f64;
            while seg + 2 < u.len() && u[seg + 1] < target {
                seg += 1;
            }
            if k == m - 1 {
                pts.push(self.pts[self.pts.len() - 1]);
                t.push(self.t[self.t.len() - 1]);
                continue;
            }
            let span = u[seg + 1] - u[seg];
            let w = if span > 0.0 { ((target - u[seg]) / span).clamp(0.0, 1.0) } else { 0.0 };
            pts.push(self.pts[seg].lerp(self.pts[seg + 1], w));
            t.push(self.t[seg] + w * (self.t[seg + 1] - self.t[seg]));
        }
        Leaf { family: self.family, pts, t }
    }
}

fn strong_full(r_c: f64, family: Family) -> Result<Leaf, FieldError> {
    let sol = StrongSolution::from_d(d_from_rc(r_c)?, Branch::Positive)?;
    let down = descending_piece(&sol, r_c, DENSE);
    let half = down[down.len() - 1].2;
    let up = exit_piece(&sol, sol.apex_angle(), 1.0, DENSE);
    Ok(Leaf::from_pieces(family, &[(down, 0.0), (up, half)]))
}

/// Straight leg from `(r0, theta)` to `(r1, theta)`, timed from `t0`.
fn radial_leg(theta: f64, r0: f64, r1: f64, t0: f64) -> Vec<(f64, CartPoint, f64)> {
    let f0 = radial_antiderivative(r0);
    (0..=DENSE)
        .map(|k| {
            let u = k as f64 / DENSE as f64;
            // Quadratic spacing towards r = 1, where the time varies fastest.
            let w = if r1 > r0 { 1.0 - (1.0 - u) * (1.0 - u) } else { u * u };
            let r = if k == DENSE { r1 } else { r0 + (r1 - r0) * w };
            (u, CartPoint::from_polar(r, theta), t0 + (radial_antiderivative(r) - f0).abs())
        })
        .collect()
}

/// Leaves of the unconstrained problem in fan order: the limiting weak curve,
/// strong solutions with critical radius evenly spaced in `(0, 1)`, and weak
/// rays from `2pi/3` to `pi`.
fn disk_leaves(n_curves: usize) -> Result<Vec<Vec<Leaf>>, FieldError> {
    let drop = radial_leg(0.0, 1.0, 0.0, 0.0);
    let half = radial_antiderivative(1.0);
    let limit =
        Leaf::from_pieces(Family::Weak, &[(drop, 0.0), (radial_leg(SECTOR_LIMIT, 0.0, 1.0, 0.0), half)]);
    let mut fan = vec![limit];
    let strong: Result<Vec<Leaf>, FieldError> = (1..n_curves)
        .into_par_iter()
        .map(|k| strong_full(k as f64 / n_curves as f64, Family::Strong))
        .collect();
    fan.extend(strong?);
    let n_rays = (n_curves / 4).max(16);
    let rays = (0..=n_rays)
        .map(|k| {
            let theta = SECTOR_LIMIT + (PI - SECTOR_LIMIT) * k as f64 / n_rays as f64;
            Leaf::from_pieces(Family::Weak, &[(radial_leg(theta, 0.0, 1.0, 0.0), half)])
        })
        .collect();
    Ok(vec![fan, rays])
}

/// Leaves of the obstacle problem: descending strong arcs cut off by the
/// obstacle, strong solutions that clear it, and exits from the obstacle
/// after a ride from the contact angle.
fn annulus_leaves(eps: f64, n_curves: usize) -> Result<Vec<Vec<Leaf>>, FieldError> {
    let n = (n_curves / 2).max(32);
    let (d_eps, theta_c) = tangent_params(eps)?;
    let tangent = StrongSolution::from_d(d_eps, Branch::Positive)?;

    let cut: Result<Vec<Leaf>, FieldError> = (0..=n)
        .into_par_iter()
        .map(|k| {
            if k == 0 {
                return Ok(Leaf::from_pieces(Family::Strong, &[(radial_leg(0.0, 1.0, eps, 0.0), 0.0)]));
            }
            let sol = if k == n {
                tangent
            } else {
                StrongSolution::from_d(d_from_rc(eps * k as f64 / n as f64)?, Branch::Positive)?
            };
            Ok(Leaf::from_pieces(Family::Strong, &[(descending_piece(&sol, eps, DENSE), 0.0)]))
        })
        .collect();

    let clear: Result<Vec<Leaf>, FieldError> = (0..n)
        .into_par_iter()
        .map(|k| strong_full(eps + (1.0 - eps) * k as f64 / n as f64, Family::Strong))
        .collect();

    let down = descending_piece(&tangent, eps, DENSE);
    let half = down[down.len() - 1].2;
    let exits: Result<Vec<Leaf>, FieldError> = (0..=n)
        .into_par_iter()
        .map(|k| {
            let start = theta_c + (PI - theta_c) * k as f64 / n as f64;
            let ride = arc_time(eps, start - theta_c)?.value();
            let up = exit_piece(&tangent, start, 1.0, DENSE);
            Ok(Leaf::from_pieces(Family::Constrained, &[(up, half + ride)]))
        })
        .collect();
    Ok(vec![cut?, clear?, exits?])
}

/// Upper-half raster: rings `0..n_r`, angles `k dtheta` for `k = 0..=n_theta/2`.
struct Raster {
    eps: f64,
    n_r: usize,
    n_k: usize,
    dtheta: f64,
}

impl Raster {
    fn dr(&self) -> f64 {
        (1.0 - self.eps) / (self.n_r - 1) as f64
    }

    fn point(&self, i: usize, k: usize) -> CartPoint {
        CartPoint::from_polar(ring_radius(self.eps, self.n_r, i), k as f64 * self.dtheta)
    }

    /// `(node, time)` for every node inside the triangle `a b c`.
    fn triangle(&self, v: [(CartPoint, f64); 3], out: &mut Vec<(usize, f64)>) {
        let [(a, ta), (b, tb), (c, tc)] = v;
        let det = (b - a).cross(c - a);
        if det.abs() < 1e-300 {
            return;
        }
        let r_max = a.norm().max(b.norm()).max(c.norm());
        let r_min = [(a, b), (b, c), (c, a)]
            .iter()
            .map(|&(p, q)| segment_min_radius(p, q))
            .fold(f64::INFINITY, f64::min);
        let unwrap = |p: CartPoint| {
            let th = p.angle();
            if th < -FRAC_PI_2 {
                th + TAU
            } else {
                th
            }
        };
        let (k_lo, k_hi) = if r_min < 1e-3 {
            (0, self.n_k - 1)
        } else {
            let th = [unwrap(a), unwrap(b), unwrap(c)];
            let lo = th.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = th.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = ((lo / self.dtheta) - 1e-9).ceil().max(0.0) as usize;
            let hi = ((hi / self.dtheta) + 1e-9).floor();
            if hi < 0.0 {
                return;
            }
            (lo, (hi as usize).min(self.n_k - 1))
        };
        let i_lo = (((r_min - self.eps) / self.dr()) - 1e-9).ceil().max(0.0) as usize;
        let i_hi = (((r_max - self.eps) / self.dr()) + 1e-9).floor();
        if i_hi < 0.0 {
            return;
        }
        let i_hi = (i_hi as usize).min(self.n_r - 1);
        for i in i_lo..=i_hi {
            for k in k_lo..=k_hi {
                let p = self.point(i, k);
                let wb = (p - a).cross(c - a) / det;
                let wc = (b - a).cross(p - a) / det;
                let wa = 1.0 - wb - wc;
                if wa >= -1e-9 && wb >= -1e-9 && wc >= -1e-9 {
                    out.push((i * self.n_k + k, wa * ta + wb * tb + wc * tc));
                }
            }
        }
    }
}

fn segment_min_radius(p: CartPoint, q: CartPoint) -> f64 {
    let d = q - p;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return p.norm();
    }
    let t = (-p.dot(d) / len2).clamp(0.0, 1.0);
    p.lerp(q, t).norm()
}

/// Sample the value function on an `n_r x n_theta` grid from a foliation with
/// about `n_curves` leaves per family.
pub fn value_grid(
    epsilon: f64,
    n_r: usize,
    n_theta: usize,
    n_curves: usize,
) -> Result<ValueGrid, FieldError> {
    if n_r < 16 || n_theta < 16 || !n_theta.is_multiple_of(2) {
        return Err(FieldError::InvalidGrid { n_r, n_theta });
    }
    if n_curves < 64 {
        return Err(FieldError::TooFewCurves(n_curves));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(FieldError::InvalidEpsilon(epsilon));
    }
    let families = if epsilon == 0.0 { disk_leaves(n_curves)? } else { annulus_leaves(epsilon, n_curves)? };
    let families: Vec<Vec<Leaf>> =
        families.into_iter().map(|f| f.par_iter().map(|l| l.resampled(LEAF_VERTICES)).collect()).collect();

    let raster = Raster { eps: epsilon, n_r, n_k: n_theta / 2 + 1, dtheta: TAU / n_theta as f64 };
    let size = n_r * raster.n_k;
    let mut best = vec![f64::INFINITY; size];
    let mut family = vec![Family::Strong; size];

    let pairs: Vec<(&Leaf, &Leaf)> =
        families.iter().flat_map(|f| f.windows(2).map(|w| (&w[0], &w[1]))).collect();
    let hits: Vec<(Family, Vec<(usize, f64)>)> = pairs
        .par_iter()
        .map(|&(a, b)| {
            let mut out = Vec::new();
            for k in 0..a.pts.len() - 1 {
                let (p0, p1) = ((a.pts[k], a.t[k]), (a.pts[k + 1], a.t[k + 1]));
                let (q0, q1) = ((b.pts[k], b.t[k]), (b.pts[k + 1], b.t[k + 1]));
                raster.triangle([p0, p1, q0], &mut out);
                raster.triangle([p1, q1, q0], &mut out);
            }
            // The later leaf labels the strip; weak rays come last in a fan.
            (b.family, out)
        })
        .collect();
    for (fam, list) in hits {
        for (id, t) in list {
            if t < best[id] {
                best[id] = t;
                family[id] = fam;
            }
        }
    }

    // Rim nodes sit outside the chords joining leaf ends; interpolate in
    // angle between consecutive ends on the rim instead.
    let mut ends: Vec<(f64, f64, Family)> = Vec::new();
    for leaf in families.iter().flatten() {
        for idx in [0, leaf.pts.len() - 1] {
            let p = leaf.pts[idx];
            if p.norm() >= 1.0 - 1e-9 {
                let th = p.angle();
                let th = if th < -FRAC_PI_2 { th + TAU } else { th };
                ends.push((th, leaf.t[idx], leaf.family));
            }
        }
    }
    ends.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let rim = (n_r - 1) * raster.n_k;
    for k in 0..raster.n_k {
        let id = rim + k;
        if best[id].is_finite() {
            continue;
        }
        let th = k as f64 * raster.dtheta;
        let hi = ends.partition_point(|e| e.0 < th);
        if hi == 0 || hi == ends.len() {
            continue;
        }
        let (a, b) = (ends[hi - 1], ends[hi]);
        let w = if b.0 > a.0 { (th - a.0) / (b.0 - a.0) } else { 0.0 };
        best[id] = a.1 + w * (b.1 - a.1);
        family[id] = if w < 0.5 { a.2 } else { b.2 };
    }

    // Then an inverse-distance average over deposited nodes nearby.
    let filled: Result<Vec<(f64, Family)>, FieldError> = (0..size)
        .into_par_iter()
        .map(|id| {
            if best[id].is_finite() {
                return Ok((best[id], family[id]));
            }
            let (i, k) = (id / raster.n_k, id % raster.n_k);
            let p = raster.point(i, k);
            let (mut num, mut den, mut near) = (0.0, 0.0, (f64::INFINITY, Family::Strong));
            for di in -FILL_CELLS..=FILL_CELLS {
                for dk in -FILL_CELLS..=FILL_CELLS {
                    let ii = i as i64 + di;
                    if ii < 0 || ii >= n_r as i64 {
                        continue;
                    }
                    // Reflect across theta = 0 and theta = pi.
                    let mut kk = k as i64 + dk;
                    let last = raster.n_k as i64 - 1;
                    if kk < 0 {
                        kk = -kk;
                    }
                    if kk > last {
                        kk = 2 * last - kk;
                    }
                    let other = ii as usize * raster.n_k + kk as usize;
                    if !best[other].is_finite() {
                        continue;
                    }
                    let q = raster.point(ii as usize, (k as i64 + dk).unsigned_abs() as usize);
                    let d = p.dist(q).max(1e-12);
                    let w = 1.0 / (d * d);
                    num += w * best[other];
                    den += w;
                    if d < near.0 {
                        near = (d, family[other]);
                    }
                }
            }
            if den == 0.0 {
                return Err(FieldError::InsufficientCoverage {
                    r: ring_radius(epsilon, n_r, i),
                    theta: k as f64 * raster.dtheta,
                });
            }
            Ok((num / den, near.1))
        })
        .collect();
    let filled = filled?;

    let mut values = vec![0.0; n_r * n_theta];
    let mut mask = vec![Family::Strong; n_r * n_theta];
    for i in 0..n_r {
        for j in 0..n_theta {
            let k = (j as i64 - (n_theta / 2) as i64).unsigned_abs() as usize;
            let (v, f) = filled[i * raster.n_k + k];
            values[i * n_theta + j] = v;
            mask[i * n_theta + j] = f;
        }
    }
    // The release point.
    values[(n_r - 1) * n_theta + n_theta / 2] = 0.0;
    Ok(ValueGrid { epsilon, n_r, n_theta, values, source_mask: mask })
}

/// Relative eikonal residual `| |grad V|^2 - r/(1-r) | (1-r)/r` at interior
/// nodes outside the exclusion bands. Returns the maximum and the residual per
/// node, `NaN` where excluded.
pub fn eikonal_residual(v: &ValueGrid) -> Result<(f64, Vec<f64>), FieldError> {
    let mut field = vec![f64::NAN; v.values.len()];
    let mut count = 0;
    let mut worst = 0.0_f64;
    for i in 1..v.n_r - 1 {
        let r = v.radius(i);
        for j in 0..v.n_theta {
            if excluded(r, v.angle(j)) {
                continue;
            }
            let g = v.node_gradient(i, j);
            let n2 = r / (1.0 - r);
            let res = (g.dot(g) - n2).abs() / n2;
            field[i * v.n_theta + j] = res;
            worst = worst.max(res);
            count += 1;
        }
    }
    if count < 100 {
        return Err(FieldError::GridTooCoarse(count));
    }
    Ok((worst, field))
}

/// Largest angle, in radians, between a curve's tangent and the interpolated
/// `grad V`, over samples outside the exclusion bands and off the first and
/// last ring. Samples on the obstacle itself are therefore skipped.
pub fn orthogonality_check(v: &ValueGrid, curves: &[SampledCurve]) -> f64 {
    curves
        .par_iter()
        .map(|c| {
            let pts: Vec<CartPoint> = c.points().collect();
            let mut worst = 0.0_f64;
            for k in 1..pts.len().saturating_sub(1) {
                let p = pts[k];
                let (r, theta) = (p.norm(), p.angle());
                // Central differences need a ring on each side of the cell.
                if excluded(r, theta) || r < v.radius(1) || r > v.radius(v.n_r - 2) {
                    continue;
                }
                let tangent = pts[k + 1] - pts[k - 1];
                let gx = v.bilinear(r, theta, |i, j| v.node_gradient(i, j).x);
                let gy = v.bilinear(r, theta, |i, j| v.node_gradient(i, j).y);
                let g = CartPoint::new(gx, gy);
                let norm = tangent.norm() * g.norm();
                if norm == 0.0 {
                    continue;
                }
                let cos = (tangent.dot(g) / norm).clamp(-1.0, 1.0);
                worst = worst.max(cos.acos());
            }
            worst
        })
        .reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annulus::solve_constrained;
    use crate::geom::PolarPoint;
    use crate::strong::{descent_time, shoot_through};
    use crate::weak::{sample_weak, WeakSolution};
    use std::sync::OnceLock;

    fn disk() -> &'static ValueGrid {
        static GRID: OnceLock<ValueGrid> = OnceLock::new();
        GRID.get_or_init(|| value_grid(0.0, 100, 200, 128).unwrap())
    }

    fn node_of(v: &ValueGrid, i: usize, j: usize) -> PolarPoint {
        PolarPoint { r: v.radius(i), theta: v.angle(j) }
    }

    #[test]
    fn disk_grid_examples() {
        let v = disk();
        assert_eq!(v.value(v.n_r - 1, v.n_theta / 2), 0.0);
        for j in 0..v.n_theta {
            assert!((v.value(0, j) - FRAC_PI_2).abs() < 1e-12);
        }
        assert!((v.value(v.n_r - 1, 0) - PI).abs() < 1e-9);
        assert!(v.values.iter().all(|&t| t >= 0.0 && t.is_finite()));
        for i in 0..v.n_r {
            for j in 1..v.n_theta / 2 {
                assert_eq!(v.value(i, j), v.value(i, v.n_theta - j));
            }
        }
    }

    #[test]
    fn weak_wedge_matches_the_closed_form() {
        let v = disk();
        for i in 1..v.n_r - 1 {
            for j in 0..v.n_theta {
                let p = node_of(v, i, j);
                if p.theta.abs() > SECTOR_LIMIT + 0.05 && p.r < 0.9 {
                    let exact = FRAC_PI_2 + radial_antiderivative(p.r);
                    assert!((v.value(i, j) - exact).abs() < 5e-4, "{p:?}: {} vs {exact}", v.value(i, j));
                    assert_eq!(v.source_mask[i * v.n_theta + j], Family::Weak);
                }
            }
        }
    }

    #[test]
    fn descending_nodes_match_shooting() {
        let v = disk();
        let mut checked = 0;
        for i in (20..90).step_by(7) {
            for j in (v.n_theta / 2 + 1..v.n_theta / 2 + 12).step_by(2) {
                let p = node_of(v, i, j);
                let Ok(sol) = shoot_through(p.r, p.theta) else { continue };
                let exact = descent_time(&sol, p.r).unwrap();
                assert!((v.value(i, j) - exact).abs() < 2e-3 * exact, "{p:?}: {} vs {exact}", v.value(i, j));
                checked += 1;
            }
        }
        assert!(checked > 20);
    }

    #[test]
    fn annulus_boundary_matches_the_constrained_solver() {
        let v = value_grid(0.5, 64, 128, 64).unwrap();
        for &(i, j) in &[(0, 100), (0, 127), (0, 0), (63, 0), (30, 0)] {
            let p = node_of(&v, i, j);
            let exact = solve_constrained(0.5, p).unwrap().tof.value();
            assert!((v.value(i, j) - exact).abs() < 1e-3 * exact, "{p:?}: {} vs {exact}", v.value(i, j));
        }
        assert!(v.source_mask.contains(&Family::Constrained));
        assert!(!v.source_mask.contains(&Family::Weak));
    }

    #[test]
    fn eikonal_residual_is_small_and_refines() {
        let (coarse, field) = eikonal_residual(&value_grid(0.0, 200, 400, 64).unwrap()).unwrap();
        let (fine, _) = eikonal_residual(&value_grid(0.0, 200, 400, 128).unwrap()).unwrap();
        assert!(fine < 0.05, "{fine}");
        assert!(fine <= coarse + 1e-3, "{coarse} -> {fine}");
        assert!(field.iter().any(|x| x.is_nan()));
    }

    #[test]
    fn radial_curve_is_parallel_to_the_gradient() {
        let v = disk();
        let drop = sample_weak(&WeakSolution::new(PI, 1.0).unwrap(), 401).unwrap();
        assert!(orthogonality_check(v, &[drop]).to_degrees() < 1.0);
    }

    #[test]
    fn invalid_requests() {
        assert!(matches!(value_grid(0.0, 8, 64, 64), Err(FieldError::InvalidGrid { .. })));
        assert!(matches!(value_grid(0.0, 64, 63, 64), Err(FieldError::InvalidGrid { .. })));
        assert!(matches!(value_grid(0.0, 64, 64, 10), Err(FieldError::TooFewCurves(10))));
        assert!(matches!(value_grid(1.0, 64, 64, 64), Err(FieldError::InvalidEpsilon(_))));
        let thin = ValueGrid {
            epsilon: 0.85,
            n_r: 16,
            n_theta: 16,
            values: vec![1.0; 256],
            source_mask: vec![Family::Strong; 256],
        };
        assert!(matches!(eikonal_residual(&thin), Err(FieldError::GridTooCoarse(_))));
    }
}
