//! Coordinates, sampled curves and the time-of-flight functional.
//!
//! Units: the particle is released from rest at radius 1 and the field
//! constant is 1, so the speed at radius `r` is `sqrt(1/r - 1)` and the time
//! element along a curve is `sqrt(r / (1 - r)) dl`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use thiserror::Error;

use crate::quad::{gauss_legendre, GL8};

/// Points may sit this far outside the unit circle and still count as admissible.
pub const ADMISSIBLE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("sample {index} lies at radius {radius}, outside the unit disk")]
    CurveNotAdmissible { index: usize, radius: f64 },
    #[error("curve needs at least two samples")]
    EmptyCurve,
    #[error("curve has no extent (all samples coincide)")]
    DegenerateCurve,
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
}

/// A point in polar coordinates, angle normalised to [-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarPoint {
    pub r: f64,
    pub theta: f64,
}

impl PolarPoint {
    pub fn new(r: f64, theta: f64) -> Result<Self, GeomError> {
        if !(r.is_finite() && theta.is_finite()) {
            return Err(GeomError::InvalidPoint(format!("non-finite ({r}, {theta})")));
        }
        if !(0.0..=1.0 + ADMISSIBLE_TOL).contains(&r) {
            return Err(GeomError::InvalidPoint(format!("radius {r} outside [0, 1]")));
        }
        Ok(PolarPoint { r: r.min(1.0), theta: normalize_angle(theta) })
    }

    pub fn to_cartesian(self) -> CartPoint {
        to_cartesian(self)
    }
}

/// Cartesian point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CartPoint {
    pub x: f64,
    pub y: f64,
}

impl CartPoint {
    pub const ORIGIN: CartPoint = CartPoint { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        CartPoint { x, y }
    }

    pub fn from_polar(r: f64, theta: f64) -> Self {
        CartPoint { x: r * theta.cos(), y: r * theta.sin() }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn to_polar(self) -> PolarPoint {
        PolarPoint { r: self.norm(), theta: self.angle() }
    }

    pub fn dist(self, other: CartPoint) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn scale(self, k: f64) -> CartPoint {
        CartPoint { x: self.x * k, y: self.y * k }
    }

    pub fn dot(self, o: CartPoint) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: CartPoint) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn lerp(self, o: CartPoint, t: f64) -> CartPoint {
        CartPoint { x: self.x + t * (o.x - self.x), y: self.y + t * (o.y - self.y) }
    }

    /// Rotate about the origin.
    pub fn rotate(self, angle: f64) -> CartPoint {
        let (s, c) = angle.sin_cos();
        CartPoint { x: c * self.x - s * self.y, y: s * self.x + c * self.y }
    }

    /// Mirror across the x axis (theta -> -theta).
    pub fn reflect_x_axis(self) -> CartPoint {
        CartPoint { x: self.x, y: -self.y }
    }

    /// Mirror across the line through the origin at angle `angle`.
    pub fn reflect_about(self, angle: f64) -> CartPoint {
        let (s, c) = (2.0 * angle).sin_cos();
        CartPoint { x: c * self.x + s * self.y, y: s * self.x - c * self.y }
    }
}

impl std::ops::Add for CartPoint {
    type Output = CartPoint;

    fn add(self, o: CartPoint) -> CartPoint {
        CartPoint { x: self.x + o.x, y: self.y + o.y }
    }
}

impl std::ops::Sub for CartPoint {
    type Output = CartPoint;

    fn sub(self, o: CartPoint) -> CartPoint {
        CartPoint { x: self.x - o.x, y: self.y - o.y }
    }
}

pub fn to_cartesian(p: PolarPoint) -> CartPoint {
    CartPoint::from_polar(p.r, p.theta)
}

/// Wrap an angle into [-pi, pi].
pub fn normalize_angle(theta: f64) -> f64 {
    if (-PI..=PI).contains(&theta) {
        return theta;
    }
    let t = (theta + PI).rem_euclid(2.0 * PI) - PI;
    if t == -PI && theta > 0.0 {
        PI
    } else {
        t
    }
}

/// Dimensionless time of flight.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TimeOfFlight(pub f64);

impl TimeOfFlight {
    pub fn value(self) -> f64 {
        self.0
    }
}

impl std::fmt::Display for TimeOfFlight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Speed of a particle released from rest at radius 1.
pub fn speed(r: f64) -> f64 {
    (1.0 / r - 1.0).sqrt()
}

/// Slowness `1 / speed = sqrt(r / (1 - r))`, the time density per unit length.
pub fn slowness(r: f64) -> f64 {
    let r = r.clamp(0.0, 1.0);
    (r / (1.0 - r)).sqrt()
}

/// Antiderivative of the slowness in `r`: `asin(sqrt r) - sqrt(r (1 - r))`.
///
/// Radial travel between radii `a` and `b` takes `|F(b) - F(a)|`.
pub fn radial_antiderivative(r: f64) -> f64 {
    let r = r.clamp(0.0, 1.0);
    r.sqrt().asin() - (r * (1.0 - r)).sqrt()
}

/// Time to fall radially from radius `a` to radius `b` (or climb back).
pub fn radial_time(a: f64, b: f64) -> f64 {
    (radial_antiderivative(b) - radial_antiderivative(a)).abs()
}

/// Travel time along the straight chord from `p` to `q`.
///
/// The chord is split at its closest approach to the origin so the radius is
/// monotone on each piece. On a piece, with `h` the distance from the origin to
/// the chord's line and `tau` the signed distance along it, the integrand is
/// `slowness(sqrt(h^2 + tau^2))`. Panels grow geometrically from the closest
/// approach, where the integrand varies on the scale `h`. On each panel the
/// substitution `tau = tau_hi - width * u^2` removes the `(1 - r)^(-1/2)`
/// blow-up at the rim. Lines through the origin use the exact radial
/// antiderivative.
pub fn segment_time(p: CartPoint, q: CartPoint) -> f64 {
    segment_time_with(&GL8, p, q)
}

/// `segment_time` with a caller-chosen Gauss-Legendre rule on each panel.
pub fn segment_time_with(rule: &[(f64, f64)], p: CartPoint, q: CartPoint) -> f64 {
    let p = clamp_to_disk(p);
    let q = clamp_to_disk(q);
    let d = q - p;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return 0.0;
    }
    let len = len2.sqrt();
    let t_star = -p.dot(d) / len2;
    let h = (p.cross(d) / len).abs();
    let radial = h <= 1e-12 * p.norm().max(q.norm()) + 1e-15;

    // (near, far) parameter pairs of the monotone pieces.
    let pieces: &[(f64, f64)] = if t_star <= 0.0 {
        &[(0.0, 1.0)]
    } else if t_star >= 1.0 {
        &[(1.0, 0.0)]
    } else {
        &[(t_star, 0.0), (t_star, 1.0)]
    };

    pieces
        .iter()
        .map(|&(t_near, t_far)| {
            if radial {
                let r_near = p.lerp(q, t_near).norm();
                let r_far = p.lerp(q, t_far).norm();
                return radial_time(r_near, r_far);
            }
            let tau_near = (t_near - t_star).abs() * len;
            let tau_far = (t_far - t_star).abs() * len;
            let span = tau_far - tau_near;
            if span <= 0.0 {
                return 0.0;
            }
            let mut total = 0.0;
            let mut lo = tau_near;
            while lo < tau_far {
                let hi = if lo < h { h.min(tau_far) } else { (2.5 * lo).min(tau_far) };
                let hi = if tau_far - hi < 0.25 * (hi - lo) { tau_far } else { hi };
                let w = hi - lo;
                total += gauss_legendre(
                    rule,
                    |u| {
                        let tau = hi - w * u * u;
                        2.0 * w * u * slowness((h * h + tau * tau).sqrt())
                    },
                    0.0,
                    1.0,
                );
                lo = hi;
            }
            total
        })
        .sum()
}

fn clamp_to_disk(p: CartPoint) -> CartPoint {
    let r = p.norm();
    if r > 1.0 {
        p.scale(1.0 / r)
    } else {
        p
    }
}

/// One sample of a curve: parameter, position and cumulative time from `s = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub s: f64,
    pub point: CartPoint,
    pub t_cum: f64,
}

/// Ordered polyline with per-sample cumulative time of flight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledCurve {
    samples: Vec<Sample>,
}

impl SampledCurve {
    /// Build from fully specified samples, checking every invariant.
    pub fn from_samples(samples: Vec<Sample>) -> Result<Self, GeomError> {
        if samples.is_empty() {
            return Err(GeomError::EmptyCurve);
        }
        check_admissible(samples.iter().map(|s| s.point))?;
        let first = samples[0];
        if first.s != 0.0 {
            return Err(GeomError::InvalidCurve(format!("first parameter is {}, not 0", first.s)));
        }
        if first.t_cum != 0.0 {
            return Err(GeomError::InvalidCurve(format!("first t_cum is {}, not 0", first.t_cum)));
        }
        if samples.len() > 1 && (samples[samples.len() - 1].s - 1.0).abs() > 1e-12 {
            return Err(GeomError::InvalidCurve("last parameter is not 1".into()));
        }
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1].s > w[0].s) {
                return Err(GeomError::InvalidCurve(format!("parameter not increasing at {}", i + 1)));
            }
            if w[1].t_cum < w[0].t_cum - 1e-12 || !w[1].t_cum.is_finite() {
                return Err(GeomError::InvalidCurve(format!("t_cum decreases at {}", i + 1)));
            }
        }
        Ok(SampledCurve { samples })
    }

    /// Build from parameters and points; cumulative times come from the
    /// discrete integrator.
    pub fn from_points(s: Vec<f64>, points: Vec<CartPoint>) -> Result<Self, GeomError> {
        if s.len() != points.len() {
            return Err(GeomError::InvalidCurve("parameter and point counts differ".into()));
        }
        check_admissible(points.iter().copied())?;
        let t = cumulative_times(&points);
        let samples =
            s.into_iter().zip(points).zip(t).map(|((s, point), t_cum)| Sample { s, point, t_cum }).collect();
        Self::from_samples(samples)
    }

    /// Build from points with the parameter uniform in sample index.
    pub fn from_polyline(points: Vec<CartPoint>) -> Result<Self, GeomError> {
        let n = points.len();
        let s = uniform_parameters(n);
        Self::from_points(s, points)
    }

    /// Single-point "curve", only useful as a distance argument.
    pub fn point(p: CartPoint) -> Self {
        SampledCurve { samples: vec![Sample { s: 0.0, point: p, t_cum: 0.0 }] }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = CartPoint> + '_ {
        self.samples.iter().map(|s| s.point)
    }

    pub fn first_point(&self) -> CartPoint {
        self.samples[0].point
    }

    pub fn last_point(&self) -> CartPoint {
        self.samples[self.samples.len() - 1].point
    }

    /// Cumulative time at the final sample.
    pub fn total_time(&self) -> f64 {
        self.samples[self.samples.len() - 1].t_cum
    }

    pub fn min_radius(&self) -> f64 {
        self.points().map(CartPoint::norm).fold(f64::INFINITY, f64::min)
    }

    /// Copy with `t_cum` recomputed by the discrete integrator.
    pub fn retimed(&self) -> Self {
        let pts: Vec<CartPoint> = self.points().collect();
        let t = cumulative_times(&pts);
        let samples = self.samples.iter().zip(t).map(|(s, t_cum)| Sample { t_cum, ..*s }).collect();
        SampledCurve { samples }
    }

    /// Mirror image under theta -> -theta; times are unchanged.
    pub fn reflected(&self) -> Self {
        self.map_points(CartPoint::reflect_x_axis)
    }

    /// Rotated copy; times are unchanged.
    pub fn rotated(&self, angle: f64) -> Self {
        self.map_points(|p| p.rotate(angle))
    }

    fn map_points(&self, f: impl Fn(CartPoint) -> CartPoint) -> Self {
        SampledCurve { samples: self.samples.iter().map(|s| Sample { point: f(s.point), ..*s }).collect() }
    }

    /// CSV with header `s,x,y,r,theta,t_cum`, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("s,x,y,r,theta,t_cum\n");
        for s in &self.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                format_sig(s.s),
                format_sig(s.point.x),
                format_sig(s.point.y),
                format_sig(s.point.norm()),
                format_sig(s.point.angle()),
                format_sig(s.t_cum)
            );
        }
        out
    }

    /// JSON record `{params, samples}`.
    pub fn to_json(&self, params: serde_json::Value) -> serde_json::Value {
        let samples: Vec<serde_json::Value> = self
            .samples
            .iter()
            .map(|s| {
                serde_json::json!({
                    "s": s.s,
                    "x": s.point.x,
                    "y": s.point.y,
                    "r": s.point.norm(),
                    "theta": s.point.angle(),
                    "t_cum": s.t_cum,
                })
            })
            .collect();
        serde_json::json!({ "params": params, "samples": samples })
    }
}

fn check_admissible(points: impl Iterator<Item = CartPoint>) -> Result<(), GeomError> {
    for (index, p) in points.enumerate() {
        let radius = p.norm();
        if !radius.is_finite() || radius > 1.0 + ADMISSIBLE_TOL {
            return Err(GeomError::CurveNotAdmissible { index, radius });
        }
    }
    Ok(())
}

/// `n` parameters evenly spaced on [0, 1].
pub fn uniform_parameters(n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![0.0],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

fn cumulative_times(points: &[CartPoint]) -> Vec<f64> {
    let mut t = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    t.push(0.0);
    for w in points.windows(2) {
        acc += segment_time(w[0], w[1]);
        t.push(acc);
    }
    t
}

/// Format with 12 significant digits in plain decimal notation.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_finite() { "0".to_string() } else { v.to_string() };
    }
    let exp = v.abs().log10().floor() as i32;
    if !(-30..=30).contains(&exp) {
        return format!("{v:.11e}");
    }
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    // "-0.000" style output for tiny negatives rounds to zero.
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        return "0".to_string();
    }
    s
}

/// Time of flight along a sampled curve by the discrete chord integrator.
pub fn tof_sampled(c: &SampledCurve) -> Result<TimeOfFlight, GeomError> {
    if c.len() < 2 {
        return Err(GeomError::EmptyCurve);
    }
    check_admissible(c.points())?;
    let first = c.first_point();
    if c.points().all(|p| p == first) {
        return Err(GeomError::DegenerateCurve);
    }
    let pts: Vec<CartPoint> = c.points().collect();
    Ok(TimeOfFlight(pts.windows(2).map(|w| segment_time(w[0], w[1])).sum()))
}

/// Distance from `p` to the segment `[a, b]`.
pub fn point_segment_distance(p: CartPoint, a: CartPoint, b: CartPoint) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    p.dist(a.lerp(b, t))
}

/// Distance from `p` to the polyline of `c`.
pub fn distance_to_polyline(p: CartPoint, c: &SampledCurve) -> f64 {
    let pts = c.samples();
    if pts.len() == 1 {
        return p.dist(pts[0].point);
    }
    pts.windows(2).map(|w| point_segment_distance(p, w[0].point, w[1].point)).fold(f64::INFINITY, f64::min)
}

/// One-sided sup-inf distance: the largest distance from a sample of `a` to
/// the polyline of `b`. Not symmetric.
pub fn curve_distance(a: &SampledCurve, b: &SampledCurve) -> Result<f64, GeomError> {
    if a.is_empty() || b.is_empty() {
        return Err(GeomError::EmptyCurve);
    }
    Ok(a.samples().par_iter().map(|s| distance_to_polyline(s.point, b)).reduce(|| 0.0, f64::max))
}

/// Resample uniformly in arc length, keeping both endpoints exactly. The new
/// parameter is normalised arc length; times are recomputed.
pub fn resample(c: &SampledCurve, n: usize) -> Result<SampledCurve, GeomError> {
    if n < 2 || c.len() < 2 {
        return Err(GeomError::EmptyCurve);
    }
    let pts: Vec<CartPoint> = c.points().collect();
    let mut arc = Vec::with_capacity(pts.len());
    arc.push(0.0);
    for w in pts.windows(2) {
        arc.push(arc[arc.len() - 1] + w[0].dist(w[1]));
    }
    let total = arc[arc.len() - 1];
    if total == 0.0 {
        return Err(GeomError::DegenerateCurve);
    }
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    for k in 0..n {
        if k == 0 {
            out.push(pts[0]);
            continue;
        }
        if k == n - 1 {
            out.push(pts[pts.len() - 1]);
            continue;
        }
        let target = total * k as f64 / (n - 1) as f64;
        while seg + 1 < arc.len() - 1 && arc[seg + 1] < target {
            seg += 1;
        }
        let l0 = arc[seg];
        let l1 = arc[seg + 1];
        let t = if l1 > l0 { (target - l0) / (l1 - l0) } else { 0.0 };
        out.push(pts[seg].lerp(pts[seg + 1], t.clamp(0.0, 1.0)));
    }
    SampledCurve::from_polyline(out)
}
