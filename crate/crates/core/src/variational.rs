//! Constructions from the existence argument and numerical first variations.
//!
//! `monotonize` and `symmetrize` turn an arbitrary admissible curve into one
//! that is no slower and has the structure of a minimiser. The first-variation
//! routines differentiate the discrete time of flight along a perturbation
//! and are used to certify candidate minimisers of the obstacle problem.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::geom::{segment_time, tof_sampled, CartPoint, GeomError, SampledCurve, ADMISSIBLE_TOL};

/// Step of the one-sided radial difference quotient.
pub const RADIAL_STEP: f64 = 1e-5;
/// Step of the central angular difference quotient.
pub const ANGULAR_STEP: f64 = 1e-5;

const MONOTONE_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VariationalError {
    #[error("curve never reaches the mid angle {0}")]
    NoMidAngleCrossing(f64),
    #[error("curve must end on the rim, ends at radius {0}")]
    NotRimTerminated(f64),
    #[error("inadmissible perturbation: {0}")]
    InadmissiblePerturbation(String),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Radii and continuous (unwrapped) angles of every sample. At the origin the
/// angle of the previous sample is carried forward.
pub fn polar_samples(c: &SampledCurve) -> (Vec<f64>, Vec<f64>) {
    let mut radii = Vec::with_capacity(c.len());
    let mut angles: Vec<f64> = Vec::with_capacity(c.len());
    for p in c.points() {
        let r = p.norm();
        let theta = match angles.last() {
            None => p.angle(),
            Some(&prev) if r == 0.0 => prev,
            Some(&prev) => {
                let raw = p.angle();
                let k = ((prev - raw) / std::f64::consts::TAU).round();
                raw + k * std::f64::consts::TAU
            }
        };
        radii.push(r);
        angles.push(theta);
    }
    (radii, angles)
}

fn rebuild(c: &SampledCurve, radii: &[f64], angles: &[f64]) -> Result<SampledCurve, GeomError> {
    let s = c.samples().iter().map(|x| x.s).collect();
    let pts = radii.iter().zip(angles).map(|(&r, &t)| CartPoint::from_polar(r, t)).collect();
    SampledCurve::from_points(s, pts)
}

/// Replace the angle by `min(theta_f, running sup of theta)`, mirrored when
/// `theta_f < 0`. Radii are kept; times are recomputed.
pub fn monotonize(c: &SampledCurve) -> Result<SampledCurve, VariationalError> {
    let (radii, angles) = polar_samples(c);
    let theta_f = angles[angles.len() - 1];
    let sign = if theta_f < 0.0 { -1.0 } else { 1.0 };
    let mut sup = f64::NEG_INFINITY;
    let mut out = Vec::with_capacity(angles.len());
    let mut changed = false;
    for &a in &angles {
        // Angles within round-off of the clamp are left alone, so the
        // operation is idempotent despite the polar round trip.
        let x = sign * a;
        let kept = x >= sup - MONOTONE_TOL && x <= sign * theta_f + MONOTONE_TOL;
        sup = sup.max(x);
        let clamped = if kept { a } else { sign * sup.min(sign * theta_f) };
        changed |= clamped != a;
        out.push(clamped);
    }
    if !changed {
        return Ok(c.clone());
    }
    let mut curve = rebuild(c, &radii, &out)?;
    // Samples whose angle did not move keep their exact coordinates.
    let original: Vec<CartPoint> = c.points().collect();
    let pts: Vec<CartPoint> =
        curve.points().enumerate().map(|(i, p)| if out[i] == angles[i] { original[i] } else { p }).collect();
    curve = SampledCurve::from_points(curve.samples().iter().map(|x| x.s).collect(), pts)?;
    Ok(curve)
}

/// The two reflections about the ray `theta = theta_f / 2`: the part before
/// the first crossing followed by its mirror image, and the mirror image of
/// the part after the crossing followed by that part.
pub fn symmetrize(c: &SampledCurve) -> Result<(SampledCurve, SampledCurve), VariationalError> {
    let end = c.last_point().norm();
    if (end - 1.0).abs() > 1e-9 {
        return Err(VariationalError::NotRimTerminated(end));
    }
    let (_, angles) = polar_samples(c);
    let theta_f = angles[angles.len() - 1];
    let mid = 0.5 * theta_f;
    if theta_f == 0.0 {
        return Err(VariationalError::NoMidAngleCrossing(mid));
    }
    let pts: Vec<CartPoint> = c.points().collect();
    let ray = CartPoint::from_polar(1.0, mid);
    // First sample at or past the mid angle.
    let k = angles
        .iter()
        .position(|&a| (a - mid) * theta_f.signum() >= 0.0)
        .ok_or(VariationalError::NoMidAngleCrossing(mid))?;
    if k == 0 {
        return Err(VariationalError::NoMidAngleCrossing(mid));
    }
    // Split the chord (k-1, k) where it meets the ray, so both halves together
    // have exactly the time of the input.
    let (a, b) = (pts[k - 1], pts[k]);
    let denom = (b - a).cross(ray);
    let t = if denom.abs() > 0.0 { (-a.cross(ray) / denom).clamp(0.0, 1.0) } else { 1.0 };
    let (first, second): (Vec<CartPoint>, Vec<CartPoint>) = if t <= 1e-12 {
        (pts[..k].to_vec(), pts[k - 1..].to_vec())
    } else if t >= 1.0 - 1e-12 {
        (pts[..=k].to_vec(), pts[k..].to_vec())
    } else {
        let crossing = a.lerp(b, t);
        let mut first = pts[..k].to_vec();
        first.push(crossing);
        let mut second = vec![crossing];
        second.extend_from_slice(&pts[k..]);
        (first, second)
    };
    let mirror =
        |part: &[CartPoint]| -> Vec<CartPoint> { part.iter().rev().map(|p| p.reflect_about(mid)).collect() };
    let mut out1 = first.clone();
    out1.extend(mirror(&first).into_iter().skip(1));
    let mut out2 = mirror(&second);
    out2.extend(second.into_iter().skip(1));
    Ok((SampledCurve::from_polyline(out1)?, SampledCurve::from_polyline(out2)?))
}

fn check_endpoints(name: &str, deltas: &[f64]) -> Result<(), VariationalError> {
    let n = deltas.len();
    if deltas[0] != 0.0 || deltas[n - 1] != 0.0 {
        return Err(VariationalError::InadmissiblePerturbation(format!(
            "{name} perturbation must vanish at both endpoints"
        )));
    }
    Ok(())
}

fn time_of(radii: &[f64], angles: &[f64]) -> f64 {
    let pts: Vec<CartPoint> = radii.iter().zip(angles).map(|(&r, &t)| CartPoint::from_polar(r, t)).collect();
    pts.windows(2).map(|w| segment_time(w[0], w[1])).sum()
}

/// One-sided derivative of the time along `r -> r + lambda (q - r)`,
/// Richardson-extrapolated from steps `lambda` and `lambda / 2`.
///
/// `q` gives target radii per sample; it must equal the curve's radius at both
/// endpoints and stay in `[eps_obstacle, 1]`.
pub fn first_variation_radial(
    c: &SampledCurve,
    q: &[f64],
    eps_obstacle: f64,
) -> Result<f64, VariationalError> {
    let (radii, angles) = polar_samples(c);
    if q.len() != radii.len() {
        return Err(VariationalError::InadmissiblePerturbation(format!(
            "expected {} radii, got {}",
            radii.len(),
            q.len()
        )));
    }
    let deltas: Vec<f64> = q.iter().zip(&radii).map(|(q, r)| q - r).collect();
    check_endpoints("radial", &deltas)?;
    if let Some(i) =
        q.iter().position(|&x| x < eps_obstacle - ADMISSIBLE_TOL || x > 1.0 + ADMISSIBLE_TOL || x.is_nan())
    {
        return Err(VariationalError::InadmissiblePerturbation(format!(
            "target radius {} at sample {i} leaves [{eps_obstacle}, 1]",
            q[i]
        )));
    }
    if deltas.iter().all(|&d| d == 0.0) {
        return Ok(0.0);
    }
    let base = time_of(&radii, &angles);
    let quotient = |lambda: f64| -> Result<f64, VariationalError> {
        let moved: Vec<f64> = radii.iter().zip(&deltas).map(|(r, d)| r + lambda * d).collect();
        Ok((time_of(&moved, &angles) - base) / lambda)
    };
    let coarse = quotient(RADIAL_STEP)?;
    let fine = quotient(0.5 * RADIAL_STEP)?;
    Ok(2.0 * fine - coarse)
}

/// Derivative of the time along `theta -> theta + lambda xi` by central
/// differences at `lambda` and `lambda / 2`, Richardson-extrapolated.
pub fn first_variation_angular(c: &SampledCurve, xi: &[f64]) -> Result<f64, VariationalError> {
    let (radii, angles) = polar_samples(c);
    if xi.len() != angles.len() {
        return Err(VariationalError::InadmissiblePerturbation(format!(
            "expected {} angles, got {}",
            angles.len(),
            xi.len()
        )));
    }
    check_endpoints("angular", xi)?;
    if xi.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let quotient = |lambda: f64| -> Result<f64, VariationalError> {
        let shifted =
            |sign: f64| -> Vec<f64> { angles.iter().zip(xi).map(|(a, x)| a + sign * lambda * x).collect() };
        let plus = time_of(&radii, &shifted(1.0));
        let minus = time_of(&radii, &shifted(-1.0));
        Ok((plus - minus) / (2.0 * lambda))
    };
    let coarse = quotient(ANGULAR_STEP)?;
    let fine = quotient(0.5 * ANGULAR_STEP)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// Partial derivative of the discrete time with respect to each sample's
/// radius, by central differences on the two adjacent chords. Endpoints get 0.
pub fn radial_gradient(c: &SampledCurve) -> Vec<f64> {
    let (radii, angles) = polar_samples(c);
    let n = radii.len();
    let pt = |r: f64, a: f64| CartPoint::from_polar(r, a);
    let mut grad = vec![0.0; n];
    for i in 1..n.saturating_sub(1) {
        let (prev, next) = (pt(radii[i - 1], angles[i - 1]), pt(radii[i + 1], angles[i + 1]));
        let local = |r: f64| {
            let p = pt(r, angles[i]);
            segment_time(prev, p) + segment_time(p, next)
        };
        let h = 1e-6 * radii[i].max(1e-3);
        let up = (radii[i] + h).min(1.0);
        let down = radii[i] - h;
        grad[i] = (local(up) - local(down)) / (up - down);
    }
    grad
}

/// Extremes of the first variations over random perturbations of a candidate
/// minimiser of the obstacle problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub trials: usize,
    /// Smallest one-sided radial variation; a minimiser keeps it `>= 0`.
    pub worst_radial: f64,
    /// Largest `|angular variation|`; a minimiser keeps it at 0.
    pub worst_angular: f64,
    /// Samples lying on the obstacle.
    pub contact_samples: usize,
    /// Smallest `dT/dr` over the contact samples; positive when pushing the
    /// ride outwards costs time.
    pub contact_gradient: f64,
}

/// Sum of one to three `sin^2` bumps on random sub-intervals of `[0, 1]`,
/// vanishing at both ends.
pub fn random_bumps(s: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let count = rng.gen_range(1..4);
    let mut out = vec![0.0; s.len()];
    for _ in 0..count {
        let a: f64 = rng.gen_range(0.0..0.9);
        let b = (a + rng.gen_range(0.05..0.5_f64)).min(1.0);
        let c = rng.gen_range(-1.0..1.0);
        for (o, &x) in out.iter_mut().zip(s) {
            if x > a && x < b {
                *o += c * (PI * (x - a) / (b - a)).sin().powi(2);
            }
        }
    }
    out
}

/// Evaluate `trials` radial and angular first variations of `c` along random
/// bump perturbations drawn from `seed`. Radial targets are `r + 0.05 bump`,
/// clamped into `[eps, 1]`.
pub fn stationarity_check(
    c: &SampledCurve,
    eps: f64,
    trials: usize,
    seed: u64,
) -> Result<StationarityReport, VariationalError> {
    let s: Vec<f64> = c.samples().iter().map(|x| x.s).collect();
    let (radii, _) = polar_samples(c);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut worst_radial, mut worst_angular) = (f64::INFINITY, 0.0_f64);
    for _ in 0..trials {
        let d = random_bumps(&s, &mut rng);
        let q: Vec<f64> = radii.iter().zip(&d).map(|(r, d)| (r + 0.05 * d).clamp(eps, 1.0)).collect();
        worst_radial = worst_radial.min(first_variation_radial(c, &q, eps)?);
        let xi = random_bumps(&s, &mut rng);
        worst_angular = worst_angular.max(first_variation_angular(c, &xi)?.abs());
    }
    let grad = radial_gradient(c);
    let contact: Vec<f64> = radii
        .iter()
        .zip(&grad)
        .enumerate()
        .filter(|&(i, (r, _))| i > 0 && i + 1 < radii.len() && (r - eps).abs() < 1e-12)
        .map(|(_, (_, g))| *g)
        .collect();
    Ok(StationarityReport {
        trials,
        worst_radial,
        worst_angular,
        contact_samples: contact.len(),
        contact_gradient: contact.iter().copied().fold(f64::INFINITY, f64::min),
    })
}

/// Time of flight of the curve as a plain number.
pub fn time(c: &SampledCurve) -> Result<f64, VariationalError> {
    Ok(tof_sampled(c)?.value())
}
