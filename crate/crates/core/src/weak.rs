//! Weak solutions through the origin and the corner condition.
//!
//! A weak solution drops radially from `(1, 0)` to the origin and leaves along
//! the ray at angle `theta_f`. The field's speed is infinite at the origin, so
//! the turn costs nothing and the corner condition holds trivially there.

use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_2;
use thiserror::Error;

use crate::geom::{
    normalize_angle, radial_antiderivative, slowness, CartPoint, GeomError, Sample, SampledCurve,
    TimeOfFlight,
};
use crate::strong::{
    sample_strong_with, shoot, tof_strong, Spacing, StrongError, StrongSolution, SECTOR_LIMIT,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeakError {
    #[error("terminal radius {0} outside [0, 1]")]
    InvalidRadius(f64),
    #[error("weak curves need an odd sample count of at least 3, got {0}")]
    InvalidSampleCount(usize),
    #[error("corner parameter {0} is not interior to the curve")]
    CornerAtEndpoint(f64),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeakSolution {
    pub theta_f: f64,
    pub r_f: f64,
}

impl WeakSolution {
    pub fn new(theta_f: f64, r_f: f64) -> Result<Self, WeakError> {
        if !(0.0..=1.0).contains(&r_f) {
            return Err(WeakError::InvalidRadius(r_f));
        }
        Ok(WeakSolution { theta_f: normalize_angle(theta_f), r_f })
    }
}

/// Polyline `(1, 0) -> origin -> (r_f cos theta_f, r_f sin theta_f)`, with the
/// origin at `s = 1/2`.
pub fn sample_weak(w: &WeakSolution, n: usize) -> Result<SampledCurve, WeakError> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(WeakError::InvalidSampleCount(n));
    }
    let mid = n / 2;
    let f_top = radial_antiderivative(1.0);
    let samples = (0..n)
        .map(|i| {
            let s = if i == n - 1 { 1.0 } else { i as f64 / (n - 1) as f64 };
            if i < mid {
                let r = 1.0 - 2.0 * s;
                let point = if i == 0 { CartPoint::new(1.0, 0.0) } else { CartPoint::new(r, 0.0) };
                Sample { s, point, t_cum: f_top - radial_antiderivative(r) }
            } else if i == mid {
                Sample { s: 0.5, point: CartPoint::ORIGIN, t_cum: f_top }
            } else {
                let r = if i == n - 1 { w.r_f } else { w.r_f * (2.0 * s - 1.0) };
                Sample {
                    s,
                    point: CartPoint::from_polar(r, w.theta_f),
                    t_cum: f_top + radial_antiderivative(r),
                }
            }
        })
        .collect();
    Ok(SampledCurve::from_samples(samples)?)
}

/// `pi/2 + arcsin(sqrt r_f) - sqrt(r_f (1 - r_f))`, independent of `theta_f`.
pub fn tof_weak(w: &WeakSolution) -> TimeOfFlight {
    TimeOfFlight(FRAC_PI_2 + radial_antiderivative(w.r_f))
}

/// Jump of `alpha' / (|alpha'| speed)` across the curve at parameter `s_corner`.
///
/// One-sided tangents are chords of length `l` and `l/2` measured in arc
/// length, combined by Richardson extrapolation, so the estimate does not
/// depend on how the curve is parameterised.
pub fn corner_residual(c: &SampledCurve, s_corner: f64) -> Result<f64, WeakError> {
    let samples = c.samples();
    let n = samples.len();
    if n < 3 || !(s_corner > samples[0].s && s_corner < samples[n - 1].s) {
        return Err(WeakError::CornerAtEndpoint(s_corner));
    }
    let pts: Vec<CartPoint> = c.points().collect();
    let mut arc = Vec::with_capacity(n);
    arc.push(0.0);
    for w in pts.windows(2) {
        arc.push(arc[arc.len() - 1] + w[0].dist(w[1]));
    }
    let k = samples.partition_point(|x| x.s <= s_corner).clamp(1, n - 1);
    let (s0, s1) = (samples[k - 1].s, samples[k].s);
    let frac = (s_corner - s0) / (s1 - s0);
    let here = arc[k - 1] + frac * (arc[k] - arc[k - 1]);
    let corner = pts[k - 1].lerp(pts[k], frac);

    let at = |l: f64| -> CartPoint {
        let j = arc.partition_point(|&a| a <= l).clamp(1, n - 1);
        let seg = arc[j] - arc[j - 1];
        let t = if seg > 0.0 { ((l - arc[j - 1]) / seg).clamp(0.0, 1.0) } else { 0.0 };
        pts[j - 1].lerp(pts[j], t)
    };
    // Chord length: a few local segments, kept inside the curve.
    let local = (k.saturating_sub(2)..(k + 2).min(n - 1)).map(|j| arc[j + 1] - arc[j]).fold(0.0, f64::max);
    let total = arc[n - 1];
    let l = (4.0 * local).min(here).min(total - here);
    if !(l > 0.0) {
        return Err(WeakError::CornerAtEndpoint(s_corner));
    }
    let unit = |v: CartPoint| {
        let m = v.norm();
        if m > 0.0 {
            v.scale(1.0 / m)
        } else {
            v
        }
    };
    let tangent = |sign: f64| {
        let chord = |h: f64| unit((at(here + sign * h) - corner).scale(sign));
        unit(chord(0.5 * l).scale(2.0) - chord(l))
    };
    let jump = (tangent(1.0) - tangent(-1.0)).norm();
    Ok(jump * slowness(corner.norm()))
}

/// The time-optimal curve from `(1, 0)` to `(1, theta_f)` on the full disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum DiskSolution {
    Strong(StrongSolution),
    Weak(WeakSolution),
}

impl DiskSolution {
    /// Strong curve for `|theta_f| < 2pi/3`, weak curve otherwise.
    pub fn solve(theta_f: f64) -> Result<Self, StrongError> {
        let theta_f = normalize_angle(theta_f);
        if theta_f.abs() < SECTOR_LIMIT - 1e-9 && theta_f != 0.0 {
            Ok(DiskSolution::Strong(shoot(theta_f)?))
        } else if theta_f == 0.0 {
            Err(StrongError::OutOfSector(theta_f))
        } else {
            Ok(DiskSolution::Weak(WeakSolution { theta_f, r_f: 1.0 }))
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            DiskSolution::Strong(_) => "strong",
            DiskSolution::Weak(_) => "weak",
        }
    }

    pub fn theta_f(&self) -> f64 {
        match self {
            DiskSolution::Strong(s) => s.theta_f,
            DiskSolution::Weak(w) => w.theta_f,
        }
    }

    pub fn tof(&self) -> Result<TimeOfFlight, StrongError> {
        match self {
            DiskSolution::Strong(s) => tof_strong(s),
            DiskSolution::Weak(w) => Ok(tof_weak(w)),
        }
    }

    /// Sample with about `n` points (rounded up to odd for weak curves).
    pub fn sample(&self, n: usize) -> Result<SampledCurve, StrongError> {
        match self {
            DiskSolution::Strong(s) => sample_strong_with(s, n, Spacing::UniformS),
            DiskSolution::Weak(w) => {
                let n = n.max(3) | 1;
                Ok(sample_weak(w, n).map_err(|e| match e {
                    WeakError::Geom(g) => StrongError::Geom(g),
                    other => unreachable!("{other}"),
                })?)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::tof_sampled;
    use crate::strong::Branch;
    use std::f64::consts::PI;

    #[test]
    fn sample_weak_shape() {
        let w = WeakSolution::new(PI, 1.0).unwrap();
        let c = sample_weak(&w, 101).unwrap();
        assert_eq!(c.samples()[50].point, CartPoint::ORIGIN);
        assert_eq!(c.samples()[50].s, 0.5);
        assert!((c.last_point().x + 1.0).abs() < 1e-15);
        assert!(c.last_point().y.abs() < 1e-15);
        for p in c.points() {
            assert!(p.y.abs() < 1e-15);
        }
        let leg = sample_weak(&WeakSolution::new(1.0, 0.0).unwrap(), 11).unwrap();
        assert_eq!(leg.last_point(), CartPoint::ORIGIN);
        assert!(sample_weak(&w, 100).is_err());
        assert!(sample_weak(&w, 1).is_err());
        assert!(WeakSolution::new(0.0, 1.5).is_err());
    }

    #[test]
    fn tof_weak_examples() {
        let full = tof_weak(&WeakSolution::new(2.5, 1.0).unwrap()).value();
        assert!((full - PI).abs() < 1e-15);
        let drop = tof_weak(&WeakSolution::new(2.5, 0.0).unwrap()).value();
        assert!((drop - FRAC_PI_2).abs() < 1e-15);
        for &(th, rf) in &[(PI, 1.0), (2.3, 0.6), (-2.9, 0.25)] {
            let w = WeakSolution::new(th, rf).unwrap();
            let c = sample_weak(&w, 10_001).unwrap();
            let d = tof_sampled(&c).unwrap().value();
            assert!((d - tof_weak(&w).value()).abs() < 2e-4, "{th} {rf}: {d}");
            assert!((c.total_time() - tof_weak(&w).value()).abs() < 1e-14);
        }
    }

    #[test]
    fn corner_at_origin_vanishes() {
        let c = sample_weak(&WeakSolution::new(2.4, 1.0).unwrap(), 1001).unwrap();
        assert!(corner_residual(&c, 0.5).unwrap() < 1e-3);
    }

    #[test]
    fn right_angle_corner() {
        let pts = vec![
            CartPoint::new(1.0, 0.0),
            CartPoint::new(0.75, 0.0),
            CartPoint::new(0.5, 0.0),
            CartPoint::new(0.5, 0.25),
            CartPoint::new(0.5, 0.5),
        ];
        let c = SampledCurve::from_polyline(pts).unwrap();
        let s = c.samples()[2].s;
        let res = corner_residual(&c, s).unwrap();
        assert!((res - 2f64.sqrt()).abs() < 1e-9, "{res}");
    }

    #[test]
    fn smooth_strong_curve_has_no_corner() {
        let sol = StrongSolution::from_d(0.23, Branch::Positive).unwrap();
        let c = sample_strong_with(&sol, 4001, Spacing::UniformPsi).unwrap();
        for &s in &[0.1, 0.3, 0.5, 0.62, 0.9] {
            let res = corner_residual(&c, s).unwrap();
            assert!(res < 1e-3, "s = {s}: {res}");
        }
    }

    #[test]
    fn corner_requires_interior_parameter() {
        let c = sample_weak(&WeakSolution::new(2.4, 1.0).unwrap(), 11).unwrap();
        assert!(matches!(corner_residual(&c, 0.0), Err(WeakError::CornerAtEndpoint(_))));
        assert!(matches!(corner_residual(&c, 1.0), Err(WeakError::CornerAtEndpoint(_))));
    }

    #[test]
    fn disk_solution_selects_family() {
        assert_eq!(DiskSolution::solve(1.0).unwrap().family(), "strong");
        assert_eq!(DiskSolution::solve(SECTOR_LIMIT).unwrap().family(), "weak");
        assert_eq!(DiskSolution::solve(-3.0).unwrap().family(), "weak");
        let weak = DiskSolution::solve(2.5).unwrap();
        assert!((weak.tof().unwrap().value() - PI).abs() < 1e-15);
        let strong = DiskSolution::solve(1.5).unwrap();
        assert!(strong.tof().unwrap().value() < PI);
    }
}
