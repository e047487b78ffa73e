//! Discrete shortest-time paths on a polar grid.
//!
//! Nodes sit on rings `r_i = r_lo + i h`, `h = (1 - r_lo) / n_r`, at angles
//! `theta_j = -pi + 2 pi j / n_theta`; doubling both resolutions keeps every
//! coarse node. Edges are straight chords to the offsets of a stencil, timed by
//! Gauss quadrature; by rotational symmetry a weight depends only on the ring
//! and the offset. The release point `(1, 0)` and each query point are exact
//! nodes joined to a block of nearby grid nodes. Every grid path is an
//! admissible curve, so labels bound the true minimum time from above.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::{PI, TAU};
use thiserror::Error;

use crate::annulus::arc_time;
use crate::geom::{radial_time, segment_time_with, CartPoint, PolarPoint, TimeOfFlight};
use crate::quad::GL5;

/// Half-width, in grid indices, of the block joined to the source and targets.
const ATTACH: i64 = 3;

/// Rings up to this radius are joined to the origin node by radial chords.
const ORIGIN_REACH: f64 = 0.05;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("point ({x}, {y}) lies outside the domain")]
    OutsideDomain { x: f64, y: f64 },
    #[error("target is unreachable from the source")]
    Unreachable,
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// Neighbour offsets `(ring step, angle step)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stencil {
    /// The 8-neighbourhood plus knight moves.
    Sixteen,
    /// Every offset with coprime components bounded by `k` in absolute value.
    Primitive(u32),
    /// Coprime offsets with `|a| <= kr`, `|b| <= kt`, together with their
    /// multiples by `2, 4, .., 2^levels`. A graph at `2^levels` times a base
    /// resolution then contains every path of the base graph.
    Nested { kr: u32, kt: u32, levels: u32 },
}

/// Axis, diagonal and knight moves.
#[rustfmt::skip]
const SIXTEEN: [(i64, i64); 16] = [
    (1, 0), (-1, 0), (0, 1), (0, -1),
    (1, 1), (1, -1), (-1, 1), (-1, -1),
    (1, 2), (1, -2), (-1, 2), (-1, -2),
    (2, 1), (2, -1), (-2, 1), (-2, -1),
];

impl Stencil {
    pub fn offsets(self) -> Vec<(i64, i64)> {
        match self {
            Stencil::Sixteen => SIXTEEN.to_vec(),
            Stencil::Primitive(k) => {
                let k = k as i64;
                let mut out = Vec::new();
                for a in -k..=k {
                    for b in -k..=k {
                        if (a, b) != (0, 0) && gcd(a.unsigned_abs(), b.unsigned_abs()) == 1 {
                            out.push((a, b));
                        }
                    }
                }
                out
            }
            Stencil::Nested { kr, kt, levels } => {
                let (kr, kt) = (kr as i64, kt as i64);
                let mut out = Vec::new();
                for level in 0..=levels {
                    let m = 1_i64 << level;
                    for a in -kr..=kr {
                        for b in -kt..=kt {
                            if (a, b) != (0, 0) && gcd(a.unsigned_abs(), b.unsigned_abs()) == 1 {
                                out.push((m * a, m * b));
                            }
                        }
                    }
                }
                out
            }
        }
    }

    /// Stencil for the `level`-th doubling of a base grid in a refinement
    /// study; each level's graph contains every path of the previous one.
    pub fn refinement(level: u32) -> Self {
        Stencil::Nested { kr: 12, kt: 4, levels: level }
    }

    /// Factor by which attachment blocks are widened.
    fn scale(self) -> i64 {
        match self {
            Stencil::Nested { levels, .. } => 1 << levels,
            _ => 1,
        }
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Travel time along the straight chord `p -> q`, 5-point Gauss per panel.
pub fn edge_time(p: CartPoint, q: CartPoint) -> Result<TimeOfFlight, OracleError> {
    for x in [p, q] {
        if !(x.norm() <= 1.0 + 1e-9) {
            return Err(OracleError::OutsideDomain { x: x.x, y: x.y });
        }
    }
    if p != q && p.norm() >= 1.0 - 1e-12 && q.norm() >= 1.0 - 1e-12 {
        return Err(OracleError::OutsideDomain { x: q.x, y: q.y });
    }
    Ok(TimeOfFlight(segment_time_with(&GL5, p, q)))
}

/// Smallest radius on the chord `p -> q`.
fn chord_min_radius(p: CartPoint, q: CartPoint) -> f64 {
    let d = q - p;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return p.norm();
    }
    let t = (-p.dot(d) / len2).clamp(0.0, 1.0);
    p.lerp(q, t).norm()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridGraph {
    pub n_r: usize,
    pub n_theta: usize,
    pub epsilon: f64,
    /// Radius of the collapsed disk around the origin (0 when `epsilon > 0`).
    pub r_min: f64,
    pub stencil: Stencil,
    offsets: Vec<(i64, i64)>,
    /// Ring index of the first kept ring.
    first_ring: usize,
    /// Radii of the kept rings.
    rings: Vec<f64>,
    /// `weights[ring][offset]`, `None` when the chord leaves the domain.
    weights: Vec<Vec<Option<f64>>>,
}

impl GridGraph {
    pub fn new(n_r: usize, n_theta: usize, epsilon: f64) -> Result<Self, OracleError> {
        Self::with_stencil(n_r, n_theta, epsilon, Stencil::Sixteen)
    }

    pub fn with_stencil(
        n_r: usize,
        n_theta: usize,
        epsilon: f64,
        stencil: Stencil,
    ) -> Result<Self, OracleError> {
        if n_r < 4 || n_theta < 8 || !n_theta.is_multiple_of(2) {
            return Err(OracleError::InvalidGrid(format!(
                "need n_r >= 4 and even n_theta >= 8, got {n_r} x {n_theta}"
            )));
        }
        if !(0.0..1.0).contains(&epsilon) {
            return Err(OracleError::InvalidGrid(format!("epsilon {epsilon} outside [0, 1)")));
        }
        let h = (1.0 - epsilon) / n_r as f64;
        let (r_min, first_ring) = if epsilon == 0.0 {
            let r_min = f64::max(0.01, 2.0 / n_r as f64);
            (r_min, (r_min / h).ceil() as usize)
        } else {
            (0.0, 0)
        };
        let rings: Vec<f64> = (first_ring..n_r).map(|i| epsilon + i as f64 * h).collect();
        let offsets = stencil.offsets();
        let dtheta = TAU / n_theta as f64;
        let weights = rings
            .par_iter()
            .enumerate()
            .map(|(i, &r)| {
                offsets
                    .iter()
                    .map(|&(a, b)| {
                        let k = i as i64 + a;
                        if k < 0 || k >= rings.len() as i64 {
                            return None;
                        }
                        let r2 = rings[k as usize];
                        let p = CartPoint::from_polar(r, 0.0);
                        let q = CartPoint::from_polar(r2, b as f64 * dtheta);
                        if epsilon > 0.0 && chord_min_radius(p, q) < epsilon - 1e-12 {
                            // Along the obstacle itself the ride is admissible.
                            return if a == 0 && i == 0 {
                                arc_time(epsilon, b.unsigned_abs() as f64 * dtheta).ok().map(|t| t.value())
                            } else {
                                None
                            };
                        }
                        Some(segment_time_with(&GL5, p, q))
                    })
                    .collect()
            })
            .collect();
        Ok(GridGraph { n_r, n_theta, epsilon, r_min, stencil, offsets, first_ring, rings, weights })
    }

    fn spacing(&self) -> f64 {
        (1.0 - self.epsilon) / self.n_r as f64
    }

    fn dtheta(&self) -> f64 {
        TAU / self.n_theta as f64
    }

    fn grid_nodes(&self) -> usize {
        self.rings.len() * self.n_theta
    }

    fn origin_id(&self) -> Option<usize> {
        (self.epsilon == 0.0).then(|| self.grid_nodes())
    }

    fn source_id(&self) -> usize {
        self.grid_nodes() + usize::from(self.epsilon == 0.0)
    }

    fn node_point(&self, id: usize) -> CartPoint {
        let (i, j) = (id / self.n_theta, id % self.n_theta);
        CartPoint::from_polar(self.rings[i], -PI + j as f64 * self.dtheta())
    }

    /// Grid nodes near `p`, with admissible chord times from `p`. Block edges
    /// are aligned to multiples of the stencil scale so that a refined graph
    /// attaches to a superset of the coarse nodes.
    fn attach(&self, p: CartPoint) -> Vec<(usize, f64)> {
        let m = self.stencil.scale();
        let fi = (p.norm() - self.epsilon) / self.spacing() / m as f64;
        let fj = (p.angle() + PI) / self.dtheta() / m as f64;
        let (i_lo, i_hi) = (m * (fi.floor() as i64 - ATTACH), m * (fi.ceil() as i64 + ATTACH));
        let (j_lo, j_hi) = (m * (fj.floor() as i64 - ATTACH), m * (fj.ceil() as i64 + ATTACH));
        let first = self.first_ring as i64;
        let mut out = Vec::new();
        for i in i_lo.max(first)..=i_hi.min(self.n_r as i64 - 1) {
            for j in j_lo..=j_hi {
                let jj = j.rem_euclid(self.n_theta as i64) as usize;
                let id = (i - first) as usize * self.n_theta + jj;
                let q = self.node_point(id);
                if self.epsilon > 0.0 && chord_min_radius(p, q) < self.epsilon - 1e-12 {
                    continue;
                }
                if let Ok(t) = edge_time(p, q) {
                    out.push((id, t.value()));
                }
            }
        }
        out
    }

    /// Number of innermost rings joined to the origin node.
    fn origin_rings(&self) -> usize {
        if self.epsilon > 0.0 {
            return 0;
        }
        let by_radius = self.rings.iter().take_while(|&&r| r <= ORIGIN_REACH + 1e-12).count();
        by_radius.max(ATTACH as usize).min(self.rings.len())
    }

    /// Shortest times from `(1, 0)` to every node.
    pub fn labels(&self) -> Labels<'_> {
        let n = self.source_id() + 1;
        let mut dist = vec![f64::INFINITY; n];
        let mut heap = BinaryHeap::new();
        let source = self.source_id();
        dist[source] = 0.0;
        heap.push(Entry { time: 0.0, node: source });
        let source_edges = self.attach(CartPoint::new(1.0, 0.0));
        let origin = self.origin_id();
        let origin_ring_count = self.origin_rings();
        while let Some(Entry { time, node }) = heap.pop() {
            if time > dist[node] {
                continue;
            }
            let mut relax = |next: usize, w: f64, heap: &mut BinaryHeap<Entry>| {
                let t = time + w;
                if t < dist[next] {
                    dist[next] = t;
                    heap.push(Entry { time: t, node: next });
                }
            };
            if node == source {
                for &(id, w) in &source_edges {
                    relax(id, w, &mut heap);
                }
                continue;
            }
            if Some(node) == origin {
                for i in 0..origin_ring_count {
                    let w = radial_time(0.0, self.rings[i]);
                    for j in 0..self.n_theta {
                        relax(i * self.n_theta + j, w, &mut heap);
                    }
                }
                continue;
            }
            let (i, j) = (node / self.n_theta, node % self.n_theta);
            for (k, &(a, b)) in self.offsets.iter().enumerate() {
                if let Some(w) = self.weights[i][k] {
                    let ii = (i as i64 + a) as usize;
                    let jj = (j as i64 + b).rem_euclid(self.n_theta as i64) as usize;
                    relax(ii * self.n_theta + jj, w, &mut heap);
                }
            }
            if let Some(o) = origin {
                if i < origin_ring_count {
                    relax(o, radial_time(0.0, self.rings[i]), &mut heap);
                }
            }
        }
        Labels { graph: self, dist }
    }
}

#[derive(Debug, Clone, Copy)]
struct Entry {
    time: f64,
    node: usize,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // Min-heap on time.
        other.time.total_cmp(&self.time).then_with(|| other.node.cmp(&self.node))
    }
}

/// Shortest-path labels of one graph.
pub struct Labels<'a> {
    graph: &'a GridGraph,
    dist: Vec<f64>,
}

impl Labels<'_> {
    /// Minimal time to `target`, which is joined to the nodes around it.
    pub fn query(&self, target: PolarPoint) -> Result<TimeOfFlight, OracleError> {
        let g = self.graph;
        let p = target.to_cartesian();
        if target.r < g.epsilon - 1e-12 {
            return Err(OracleError::OutsideDomain { x: p.x, y: p.y });
        }
        if p == CartPoint::new(1.0, 0.0) {
            return Ok(TimeOfFlight(0.0));
        }
        if let Some(o) = g.origin_id() {
            if target.r <= g.r_min {
                let via = self.dist[o] + radial_time(0.0, target.r);
                return finite(via);
            }
        }
        let best = g.attach(p).into_iter().map(|(id, w)| self.dist[id] + w).fold(f64::INFINITY, f64::min);
        finite(best)
    }

    /// Label of every grid node as `(r, theta, time)`.
    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        let g = self.graph;
        (0..g.grid_nodes()).map(move |id| {
            let (i, j) = (id / g.n_theta, id % g.n_theta);
            (g.rings[i], -PI + j as f64 * g.dtheta(), self.dist[id])
        })
    }
}

fn finite(t: f64) -> Result<TimeOfFlight, OracleError> {
    if t.is_finite() {
        Ok(TimeOfFlight(t))
    } else {
        Err(OracleError::Unreachable)
    }
}

/// Shortest grid time from `(1, 0)` to `target`.
pub fn oracle_min_time(g: &GridGraph, target: PolarPoint) -> Result<TimeOfFlight, OracleError> {
    g.labels().query(target)
}

/// Oracle times for each target on grids `2^k (n_r, n_theta)`, `k < levels`,
/// using nested stencils so that the values cannot increase with `k`.
/// Returns one row per level, one column per target.
pub fn refinement_study(
    epsilon: f64,
    n_r: usize,
    n_theta: usize,
    levels: u32,
    targets: &[PolarPoint],
) -> Result<Vec<Vec<TimeOfFlight>>, OracleError> {
    (0..levels)
        .map(|k| {
            let m = 1usize << k;
            let g = GridGraph::with_stencil(m * n_r, m * n_theta, epsilon, Stencil::refinement(k))?;
            let labels = g.labels();
            targets.iter().map(|&t| labels.query(t)).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annulus::solve_constrained;
    use crate::geom::radial_antiderivative;
    use crate::strong::{shoot, tof_strong};

    #[test]
    fn edge_time_examples() {
        let p = CartPoint::new(1.0, 0.0);
        let q = CartPoint::new(0.999, 0.0);
        let exact = radial_antiderivative(1.0) - radial_antiderivative(0.999);
        assert!((edge_time(p, q).unwrap().value() - exact).abs() < 1e-6);
        assert_eq!(edge_time(q, q).unwrap().value(), 0.0);
        let a = CartPoint::from_polar(0.7, 0.3);
        let b = CartPoint::from_polar(0.4, 0.9);
        let t1 = edge_time(a, b).unwrap().value();
        let t2 = edge_time(a.reflect_x_axis(), b.reflect_x_axis()).unwrap().value();
        assert!((t1 - t2).abs() < 1e-14);
        assert!(edge_time(CartPoint::new(1.1, 0.0), q).is_err());
        assert!(edge_time(p, CartPoint::from_polar(1.0, 0.5)).is_err());
    }

    #[test]
    fn stencils() {
        assert_eq!(Stencil::Sixteen.offsets().len(), 16);
        let p2 = Stencil::Primitive(2).offsets();
        assert_eq!(p2.len(), 16);
        assert!(Stencil::Primitive(3).offsets().len() > 16);
    }

    #[test]
    fn coarse_grid_bounds_weak_time() {
        let g = GridGraph::new(60, 120, 0.0).unwrap();
        let labels = g.labels();
        let t = labels.query(PolarPoint::new(1.0, PI).unwrap()).unwrap().value();
        assert!((PI - 1e-9..1.03 * PI).contains(&t), "{t}");
        let up = labels.query(PolarPoint::new(0.6, 1.0).unwrap()).unwrap().value();
        let down = labels.query(PolarPoint::new(0.6, -1.0).unwrap()).unwrap().value();
        assert!((up - down).abs() < 1e-9);
    }

    #[test]
    fn obstacle_grid_respects_the_obstacle() {
        let g = GridGraph::new(40, 160, 0.5).unwrap();
        let labels = g.labels();
        assert!(labels.nodes().all(|(r, _, t)| r >= 0.5 && t.is_finite()));
        assert!(labels.query(PolarPoint::new(0.3, 1.0).unwrap()).is_err());
    }

    #[test]
    fn refinement_never_increases_and_brackets_the_minimum() {
        let targets = [
            PolarPoint::new(1.0, PI / 3.0).unwrap(),
            PolarPoint::new(1.0, 2.0 * PI / 3.0).unwrap(),
            PolarPoint::new(0.5, -1.2).unwrap(),
        ];
        let rows = refinement_study(0.0, 25, 50, 3, &targets).unwrap();
        for k in 1..rows.len() {
            for (fine, coarse) in rows[k].iter().zip(&rows[k - 1]) {
                assert!(fine.value() <= coarse.value() + 1e-6, "{rows:?}");
            }
        }
        let exact = tof_strong(&shoot(PI / 3.0).unwrap()).unwrap().value();
        let last = rows[2][0].value();
        assert!(last >= exact - 1e-9 && last < 1.05 * exact, "{last} vs {exact}");
    }

    #[test]
    fn nested_stencil_contains_its_multiples() {
        let base = Stencil::refinement(0).offsets();
        let fine = Stencil::refinement(2).offsets();
        for &(a, b) in &base {
            assert!(fine.contains(&(4 * a, 4 * b)));
            assert!(fine.contains(&(2 * a, 2 * b)));
        }
        assert_eq!(fine.len(), 3 * base.len());
    }

    #[test]
    fn obstacle_targets_bracket_the_constrained_time() {
        let g = GridGraph::new(40, 160, 0.5).unwrap();
        let target = PolarPoint::new(1.0, 2.0 * PI / 3.0).unwrap();
        let t = oracle_min_time(&g, target).unwrap().value();
        let exact = solve_constrained(0.5, target).unwrap().tof.value();
        assert!(t >= exact - 1e-9 && t < 1.1 * exact, "{t} vs {exact}");
    }

    #[test]
    fn invalid_grids() {
        assert!(GridGraph::new(2, 100, 0.0).is_err());
        assert!(GridGraph::new(10, 101, 0.0).is_err());
        assert!(GridGraph::new(10, 100, 1.0).is_err());
    }
}
