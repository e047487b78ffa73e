//! Minimisers on the annulus `eps <= r <= 1`.
//!
//! The obstacle `r = eps` is touched tangentially by the strong solution whose
//! critical radius is `eps`; it meets the circle at the contact angle
//! `theta_c`. Every constrained minimiser is assembled from three pieces: a
//! descending strong arc, a ride along the obstacle, and a rotated copy of the
//! ascending half of the tangent solution. Pieces occupy equal thirds of the
//! curve parameter; within a piece `s` is affine in `r` (strong arcs) or in
//! `theta` (obstacle arc).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

use crate::geom::{curve_distance, CartPoint, GeomError, PolarPoint, Sample, SampledCurve, TimeOfFlight};
use crate::strong::{
    d_from_rc, descending_profile, psi_of_r, r_of_psi, sample_strong_with, shoot, shoot_through, tof_strong,
    Branch, Spacing, StrongError, StrongSolution,
};
use crate::weak::{sample_weak, WeakError, WeakSolution};

/// Samples per curve unless the caller asks otherwise.
pub const DEFAULT_SAMPLES: usize = 1501;

const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnnulusError {
    #[error("{what} = {value} outside its valid range")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("terminal (r = {r}, theta = {theta}) is not on the boundary of the half annulus")]
    NotOnBoundary { r: f64, theta: f64 },
    #[error("arc span must be non-negative, got {0}")]
    NegativeSpan(f64),
    #[error(transparent)]
    Strong(#[from] StrongError),
    #[error(transparent)]
    Weak(#[from] WeakError),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Terminal on the rim, reached by a strong solution that clears the obstacle.
    SmoothInterior,
    /// Terminal on the rim, tangent entry, ride, tangent exit.
    TangentArc,
    /// Terminal on the ray `theta = pi`.
    TangentExitR3,
    /// Terminal on the obstacle itself.
    ObstacleTerminalR4,
    /// Terminal on the ray `theta = 0`.
    RadialR1,
}

impl Regime {
    pub fn region(self) -> &'static str {
        match self {
            Regime::RadialR1 => "R1",
            Regime::SmoothInterior | Regime::TangentArc => "R2",
            Regime::TangentExitR3 => "R3",
            Regime::ObstacleTerminalR4 => "R4",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnulusSolution {
    pub epsilon: f64,
    pub terminal: PolarPoint,
    pub regime: Regime,
    pub entry: Option<StrongSolution>,
    pub arc_span: Option<(f64, f64)>,
    pub exit: Option<StrongSolution>,
    pub tof: TimeOfFlight,
    pub curve: SampledCurve,
}

fn check_epsilon(eps: f64) -> Result<(), AnnulusError> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(AnnulusError::OutOfRange { what: "epsilon", value: eps })
    }
}

/// `(D_eps, theta_c)`: the constant of the solution tangent to `r = eps` and
/// the angle of the contact point.
pub fn tangent_params(eps: f64) -> Result<(f64, f64), AnnulusError> {
    check_epsilon(eps)?;
    let d = d_from_rc(eps)?;
    let sol = StrongSolution::from_d(d, Branch::Positive)?;
    Ok((d, sol.apex_angle()))
}

/// Time to ride the obstacle through `dtheta`: `eps^1.5 dtheta / sqrt(1 - eps)`.
pub fn arc_time(eps: f64, dtheta: f64) -> Result<TimeOfFlight, AnnulusError> {
    if !(dtheta >= 0.0) {
        return Err(AnnulusError::NegativeSpan(dtheta));
    }
    Ok(TimeOfFlight(eps.powf(1.5) * dtheta / (1.0 - eps).sqrt()))
}

/// Regime of a terminal on the boundary of the half annulus. Terminals with
/// `theta < 0` are classified by their mirror image.
pub fn classify_terminal(eps: f64, terminal: PolarPoint) -> Result<Regime, AnnulusError> {
    check_epsilon(eps)?;
    let (r, theta) = (terminal.r, terminal.theta.abs());
    let off = || AnnulusError::NotOnBoundary { r: terminal.r, theta: terminal.theta };
    if r < eps - BOUNDARY_TOL || r > 1.0 + BOUNDARY_TOL {
        return Err(off());
    }
    if theta <= BOUNDARY_TOL {
        return Ok(Regime::RadialR1);
    }
    if theta >= PI - BOUNDARY_TOL {
        return Ok(Regime::TangentExitR3);
    }
    if (r - 1.0).abs() <= BOUNDARY_TOL {
        let (_, theta_c) = tangent_params(eps)?;
        return Ok(if 0.5 * theta <= theta_c { Regime::SmoothInterior } else { Regime::TangentArc });
    }
    if (r - eps).abs() <= BOUNDARY_TOL {
        return Ok(Regime::ObstacleTerminalR4);
    }
    Err(off())
}

/// Accumulates curve pieces; each piece gets an equal share of `s`.
struct Assembly {
    pieces: Vec<Vec<(f64, CartPoint, f64)>>,
}

impl Assembly {
    fn new() -> Self {
        Assembly { pieces: Vec::new() }
    }

    /// Push a piece of `(local parameter in [0, 1], point, time since piece start)`.
    fn push(&mut self, piece: Vec<(f64, CartPoint, f64)>) {
        if piece.len() >= 2 {
            self.pieces.push(piece);
        }
    }

    fn finish(self) -> Result<SampledCurve, AnnulusError> {
        let count = self.pieces.len() as f64;
        let mut samples: Vec<Sample> = Vec::new();
        let mut t0 = 0.0;
        for (j, piece) in self.pieces.iter().enumerate() {
            let skip = usize::from(j > 0);
            for &(u, point, t) in &piece[skip..] {
                samples.push(Sample { s: (j as f64 + u) / count, point, t_cum: t0 + t });
            }
            t0 += piece[piece.len() - 1].2;
        }
        let last = samples.len() - 1;
        samples[last].s = 1.0;
        Ok(SampledCurve::from_samples(samples)?)
    }
}

/// `r`, snapped onto the apex when it differs from `r_c` only by round-off;
/// `psi` magnifies such differences to their square root.
fn snap(r_c: f64, r: f64) -> f64 {
    if (r - r_c).abs() < 1e-12 {
        r_c
    } else {
        r
    }
}

fn psi_radii(r_c: f64, r_hi: f64, r_lo: f64, m: usize) -> Vec<f64> {
    let (r_hi, r_lo) = (snap(r_c, r_hi), snap(r_c, r_lo));
    let (a, b) = (psi_of_r(r_c, r_hi), psi_of_r(r_c, r_lo));
    (0..=m)
        .map(|k| match k {
            0 => r_hi,
            k if k == m => r_lo,
            k => r_of_psi(r_c, a + (b - a) * k as f64 / m as f64),
        })
        .collect()
}

/// Descending part of `sol` from the rim to radius `r_end`.
pub(crate) fn descending_piece(sol: &StrongSolution, r_end: f64, m: usize) -> Vec<(f64, CartPoint, f64)> {
    let radii = psi_radii(sol.r_c, 1.0, r_end, m);
    let prof = descending_profile(sol, &radii);
    let sign = sol.branch.sign();
    radii
        .iter()
        .zip(prof)
        .enumerate()
        .map(|(k, (&r, (angle, time)))| {
            let u = if k == m { 1.0 } else { (1.0 - r) / (1.0 - r_end) };
            let p = if k == 0 { CartPoint::new(1.0, 0.0) } else { CartPoint::from_polar(r, sign * angle) };
            (u, p, time)
        })
        .collect()
}

fn arc_piece(eps: f64, from: f64, to: f64, m: usize) -> Result<Vec<(f64, CartPoint, f64)>, AnnulusError> {
    let per_radian = arc_time(eps, 1.0)?.value();
    Ok((0..=m)
        .map(|k| {
            let u = k as f64 / m as f64;
            let theta = from + (to - from) * u;
            (u, CartPoint::from_polar(eps, theta), per_radian * (theta - from).abs())
        })
        .collect())
}

/// Ascending half of the tangent solution, rotated so that it leaves the
/// obstacle at `start` and climbs to radius `r_end`.
pub(crate) fn exit_piece(
    tangent: &StrongSolution,
    start: f64,
    r_end: f64,
    m: usize,
) -> Vec<(f64, CartPoint, f64)> {
    let eps = tangent.r_c;
    let radii: Vec<f64> = psi_radii(eps, eps, r_end, m);
    let prof = descending_profile(tangent, &radii);
    let (apex_angle, apex_time) = (prof[0].0, prof[0].1);
    radii
        .iter()
        .zip(prof)
        .enumerate()
        .map(|(k, (&r, (angle, time)))| {
            let u = if k == m { 1.0 } else { (r - eps) / (r_end - eps) };
            let p = CartPoint::from_polar(r, start + (apex_angle - angle));
            (u, p, apex_time - time)
        })
        .collect()
}

/// Constrained minimiser from `(1, 0)` to `terminal`, with the default sample count.
pub fn solve_constrained(eps: f64, terminal: PolarPoint) -> Result<AnnulusSolution, AnnulusError> {
    solve_constrained_with(eps, terminal, DEFAULT_SAMPLES)
}

/// As [`solve_constrained`], with `3 * ((n - 1) / 3) + 1` samples: the
/// pieces share a third of the budget each.
pub fn solve_constrained_with(
    eps: f64,
    terminal: PolarPoint,
    n: usize,
) -> Result<AnnulusSolution, AnnulusError> {
    if n < 7 {
        return Err(AnnulusError::OutOfRange { what: "sample count", value: n as f64 });
    }
    let regime = classify_terminal(eps, terminal)?;
    if terminal.theta < 0.0 {
        let mirror = PolarPoint::new(terminal.r, -terminal.theta)?;
        let up = solve_constrained_with(eps, mirror, n)?;
        return Ok(AnnulusSolution {
            terminal,
            entry: up.entry.map(|s| s.flipped()),
            exit: up.exit.map(|s| s.flipped()),
            arc_span: up.arc_span.map(|(a, b)| (-a, -b)),
            curve: up.curve.reflected(),
            ..up
        });
    }
    let m = (n - 1) / 3;
    let (d_eps, theta_c) = tangent_params(eps)?;
    let tangent = StrongSolution::from_d(d_eps, Branch::Positive)?;
    let (r_t, theta_t) = (terminal.r.clamp(eps, 1.0), terminal.theta);
    let mut asm = Assembly::new();
    let mut entry = None;
    let mut arc_span = None;
    let mut exit = None;

    match regime {
        Regime::RadialR1 => {
            let pts: Vec<(f64, CartPoint, f64)> = (0..=3 * m)
                .map(|k| {
                    let u = k as f64 / (3 * m) as f64;
                    let r = 1.0 - (1.0 - r_t) * u;
                    let t = crate::geom::radial_time(1.0, r);
                    (u, CartPoint::new(r, 0.0), t)
                })
                .collect();
            asm.push(pts);
        }
        Regime::SmoothInterior => {
            let sol = shoot(theta_t)?;
            let curve = sample_strong_with(&sol, 3 * m + 1, Spacing::UniformPsi)?;
            let tof = tof_strong(&sol)?;
            return Ok(AnnulusSolution {
                epsilon: eps,
                terminal,
                regime,
                entry: Some(sol),
                arc_span: None,
                exit: None,
                tof,
                curve,
            });
        }
        Regime::TangentArc | Regime::TangentExitR3 => {
            let (leave, r_end) = if regime == Regime::TangentArc {
                (theta_t - theta_c, 1.0)
            } else {
                let prof = descending_profile(&tangent, &[tangent.r_c, r_t]);
                let swept = if r_t <= eps + BOUNDARY_TOL { 0.0 } else { prof[0].0 - prof[1].0 };
                (PI - swept, r_t)
            };
            asm.push(descending_piece(&tangent, eps, m));
            asm.push(arc_piece(eps, theta_c, leave, m)?);
            if r_end > eps + BOUNDARY_TOL {
                asm.push(exit_piece(&tangent, leave, r_end, m));
                exit = Some(tangent);
            }
            entry = Some(tangent);
            arc_span = Some((theta_c, leave));
        }
        Regime::ObstacleTerminalR4 => {
            if theta_t <= theta_c {
                let sol = shoot_through(eps, theta_t)?;
                asm.push(descending_piece(&sol, eps, 3 * m));
                entry = Some(sol);
            } else {
                asm.push(descending_piece(&tangent, eps, m));
                asm.push(arc_piece(eps, theta_c, theta_t, m)?);
                entry = Some(tangent);
                arc_span = Some((theta_c, theta_t));
            }
        }
    }
    let curve = asm.finish()?;
    let tof = TimeOfFlight(curve.total_time());
    Ok(AnnulusSolution { epsilon: eps, terminal, regime, entry, arc_span, exit, tof, curve })
}

/// Time of the member of the obstacle family with constant `d <= D_eps` that
/// ends at `(1, theta_f)`: it falls to the obstacle, hits it at angle
/// `theta_0` (transversally unless `d = D_eps`), rides to `theta_f - theta_0`
/// and climbs out as the mirror image.
pub fn family_time(eps: f64, d: f64, theta_f: f64) -> Result<TimeOfFlight, AnnulusError> {
    check_epsilon(eps)?;
    let d_eps = d_from_rc(eps)?;
    if !(d > 0.0 && d <= d_eps * (1.0 + 1e-12)) {
        return Err(AnnulusError::OutOfRange { what: "D", value: d });
    }
    let sol = StrongSolution::from_d(d, Branch::Positive)?;
    let (theta_0, fall) = descending_profile(&sol, &[snap(sol.r_c, eps.max(sol.r_c))])[0];
    let span = theta_f - 2.0 * theta_0;
    Ok(TimeOfFlight(2.0 * fall + arc_time(eps, span)?.value()))
}

/// The member of the obstacle family with constant `d <= D_eps` ending at
/// `(1, theta_f)`, sampled with `n` points per piece: the descending strong
/// arc down to the obstacle, the ride, and the mirror image of the descent.
pub fn family_curve(eps: f64, d: f64, theta_f: f64, n: usize) -> Result<SampledCurve, AnnulusError> {
    check_epsilon(eps)?;
    let d_eps = d_from_rc(eps)?;
    if !(d > 0.0 && d <= d_eps * (1.0 + 1e-12)) {
        return Err(AnnulusError::OutOfRange { what: "D", value: d });
    }
    let sol = StrongSolution::from_d(d.min(d_eps), Branch::Positive)?;
    let m = n.max(2);
    let down = descending_piece(&sol, snap(sol.r_c, eps.max(sol.r_c)), m);
    let (theta_0, fall) = (down[m].1.angle(), down[m].2);
    let span = theta_f - 2.0 * theta_0;
    if span < 0.0 {
        return Err(AnnulusError::NegativeSpan(span));
    }
    let up: Vec<(f64, CartPoint, f64)> =
        down.iter().rev().map(|&(u, p, t)| (1.0 - u, p.reflect_about(0.5 * theta_f), fall - t)).collect();
    let mut asm = Assembly::new();
    asm.push(down);
    asm.push(arc_piece(eps, theta_0, theta_0 + span, m)?);
    asm.push(up);
    asm.finish()
}

/// Evenly spaced terminals on the rim, on the ray `theta = pi` and on the
/// obstacle, `n_per_region` each, in the upper half annulus.
pub fn foliate_annulus(eps: f64, n_per_region: usize) -> Result<Vec<AnnulusSolution>, AnnulusError> {
    foliate_annulus_with(eps, n_per_region, DEFAULT_SAMPLES)
}

pub fn foliate_annulus_with(
    eps: f64,
    n_per_region: usize,
    samples: usize,
) -> Result<Vec<AnnulusSolution>, AnnulusError> {
    check_epsilon(eps)?;
    if n_per_region == 0 {
        return Err(AnnulusError::OutOfRange { what: "curves per region", value: 0.0 });
    }
    let n = n_per_region;
    let mut terminals = Vec::with_capacity(3 * n);
    for k in 1..=n {
        terminals.push(PolarPoint::new(1.0, PI * k as f64 / (n + 1) as f64)?);
    }
    for k in 0..n {
        terminals.push(PolarPoint::new(eps + (1.0 - eps) * k as f64 / n as f64, PI)?);
    }
    for k in 1..=n {
        terminals.push(PolarPoint::new(eps, PI * k as f64 / (n + 1) as f64)?);
    }
    terminals.into_par_iter().map(|t| solve_constrained_with(eps, t, samples)).collect()
}

/// Minimiser of the unconstrained problem to `(1, theta_f)`, sampled so that
/// it coincides point for point with the constrained curve when the obstacle
/// is inactive.
pub fn limit_curve(theta_f: f64, n: usize) -> Result<SampledCurve, AnnulusError> {
    if theta_f.abs() < crate::strong::SECTOR_LIMIT - 1e-9 {
        let m = (n - 1) / 3;
        Ok(sample_strong_with(&shoot(theta_f)?, 3 * m + 1, Spacing::UniformPsi)?)
    } else {
        let w = WeakSolution { theta_f, r_f: 1.0 };
        Ok(sample_weak(&w, n.max(3) | 1)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub epsilon: f64,
    pub theta_c: f64,
    pub regime: Regime,
    pub distance: f64,
}

/// Distance from the constrained minimiser to the unconstrained one for each
/// obstacle radius.
pub fn convergence_study(theta_f: f64, eps_list: &[f64]) -> Result<Vec<ConvergenceRow>, AnnulusError> {
    if !(theta_f > 0.0 && theta_f < PI) {
        return Err(AnnulusError::OutOfRange { what: "theta_f", value: theta_f });
    }
    let limit = limit_curve(theta_f, DEFAULT_SAMPLES)?;
    eps_list
        .par_iter()
        .map(|&eps| {
            let sol = solve_constrained(eps, PolarPoint::new(1.0, theta_f)?)?;
            let (_, theta_c) = tangent_params(eps)?;
            Ok(ConvergenceRow {
                epsilon: eps,
                theta_c,
                regime: sol.regime,
                distance: curve_distance(&sol.curve, &limit)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::tof_sampled;

    #[test]
    fn tangent_params_at_half() {
        let (d, theta_c) = tangent_params(0.5).unwrap();
        assert!((d - 0.125).abs() < 1e-12);
        // Independent value from a high-precision quadrature of the contact angle.
        assert!((theta_c - 0.605_367).abs() < 1e-5, "{theta_c}");
    }

    #[test]
    fn tangent_params_limits() {
        let (_, small) = tangent_params(1e-6).unwrap();
        assert!((small - PI / 3.0).abs() < 1e-2, "{small}");
        let (_, big) = tangent_params(1.0 - 1e-6).unwrap();
        assert!(big < 1e-2, "{big}");
        assert!(tangent_params(0.0).is_err());
        assert!(tangent_params(1.0).is_err());
    }

    #[test]
    fn arc_time_examples() {
        assert_eq!(arc_time(0.5, 0.0).unwrap().value(), 0.0);
        assert!((arc_time(0.5, 1.0).unwrap().value() - 0.5).abs() < 1e-15);
        assert!(matches!(arc_time(0.5, -0.1), Err(AnnulusError::NegativeSpan(_))));
        let pts: Vec<CartPoint> =
            (0..=1000).map(|k| CartPoint::from_polar(0.3, 1.2 * k as f64 / 1000.0)).collect();
        let c = SampledCurve::from_polyline(pts).unwrap();
        let d = tof_sampled(&c).unwrap().value();
        assert!((d - arc_time(0.3, 1.2).unwrap().value()).abs() < 1e-6);
    }

    #[test]
    fn classification() {
        let p = |r: f64, t: f64| PolarPoint::new(r, t).unwrap();
        assert_eq!(classify_terminal(0.5, p(1.0, PI / 3.0)).unwrap(), Regime::SmoothInterior);
        assert_eq!(classify_terminal(0.5, p(1.0, 2.0 * PI / 3.0)).unwrap(), Regime::TangentArc);
        assert_eq!(classify_terminal(0.5, p(0.7, 0.0)).unwrap(), Regime::RadialR1);
        assert_eq!(classify_terminal(0.5, p(0.7, PI)).unwrap(), Regime::TangentExitR3);
        assert_eq!(classify_terminal(0.5, p(0.5, 1.0)).unwrap(), Regime::ObstacleTerminalR4);
        assert_eq!(classify_terminal(0.5, p(1.0, -2.0)).unwrap(), Regime::TangentArc);
        assert!(matches!(classify_terminal(0.5, p(0.7, 1.0)), Err(AnnulusError::NotOnBoundary { .. })));
        assert!(classify_terminal(0.5, p(0.2, PI)).is_err());
    }

    #[test]
    fn tangent_arc_construction() {
        let sol = solve_constrained(0.5, PolarPoint::new(1.0, 2.0 * PI / 3.0).unwrap()).unwrap();
        assert_eq!(sol.regime, Regime::TangentArc);
        let entry = sol.entry.unwrap();
        assert!((entry.d - 0.125).abs() < 1e-12);
        assert!((entry.r_c - 0.5).abs() < 1e-8);
        let (a, b) = sol.arc_span.unwrap();
        let (_, theta_c) = tangent_params(0.5).unwrap();
        assert!((a - theta_c).abs() < 1e-12 && (b - (2.0 * PI / 3.0 - theta_c)).abs() < 1e-12);
        assert!(sol.curve.min_radius() >= 0.5 - 1e-9);
        let end = sol.curve.last_point();
        assert!(end.dist(CartPoint::from_polar(1.0, 2.0 * PI / 3.0)) < 1e-12);
        let discrete = tof_sampled(&sol.curve).unwrap().value();
        assert!((discrete - sol.tof.value()).abs() < 1e-3, "{discrete} vs {}", sol.tof);
    }

    #[test]
    fn smooth_interior_construction() {
        let sol = solve_constrained(0.5, PolarPoint::new(1.0, PI / 3.0).unwrap()).unwrap();
        assert_eq!(sol.regime, Regime::SmoothInterior);
        assert!((sol.entry.unwrap().d - 0.23).abs() < 5e-3);
        assert!(sol.curve.min_radius() >= 0.5);
    }

    #[test]
    fn r3_at_obstacle_is_a_pure_ride() {
        let sol = solve_constrained(0.5, PolarPoint::new(0.5, PI).unwrap()).unwrap();
        assert_eq!(sol.regime, Regime::TangentExitR3);
        assert!(sol.exit.is_none());
        assert!((sol.arc_span.unwrap().1 - PI).abs() < 1e-12);
        let end = sol.curve.last_point();
        assert!(end.dist(CartPoint::new(-0.5, 0.0)) < 1e-12);
    }

    #[test]
    fn r3_and_r4_terminals_are_hit() {
        for (r, t) in [(0.8, PI), (0.5, 0.3), (0.5, 2.0), (1.0, PI), (0.6, 0.0)] {
            let target = PolarPoint::new(r, t).unwrap();
            let sol = solve_constrained(0.5, target).unwrap();
            let end = sol.curve.last_point();
            assert!(end.dist(target.to_cartesian()) < 1e-9, "{r} {t}: {end:?}");
            assert!(sol.curve.min_radius() >= 0.5 - 1e-9);
            assert!((sol.curve.total_time() - tof_sampled(&sol.curve).unwrap().value()).abs() < 2e-3);
        }
    }

    #[test]
    fn lower_half_is_mirrored() {
        let up = solve_constrained(0.3, PolarPoint::new(1.0, 2.5).unwrap()).unwrap();
        let down = solve_constrained(0.3, PolarPoint::new(1.0, -2.5).unwrap()).unwrap();
        assert_eq!(down.curve, up.curve.reflected());
        assert_eq!(down.tof, up.tof);
    }

    #[test]
    fn tangency_at_contact() {
        let sol = solve_constrained(0.5, PolarPoint::new(1.0, 2.0 * PI / 3.0).unwrap()).unwrap();
        let s = sol.curve.samples();
        let k = s.iter().position(|x| x.s >= 1.0 / 3.0).unwrap();
        // Radial component of the backward chords, Richardson-extrapolated.
        let radial = |j: usize| {
            let (p, q) = (s[k - j].point, s[k].point);
            (p.norm() - q.norm()) / p.dist(q)
        };
        let slope = 2.0 * radial(1) - radial(2);
        assert!(slope.abs() < 1e-4, "{slope}");
    }

    #[test]
    fn tangent_member_beats_transversal_members() {
        let (eps, theta_f) = (0.5, 2.0 * PI / 3.0);
        let (d_eps, _) = tangent_params(eps).unwrap();
        let best = family_time(eps, d_eps, theta_f).unwrap().value();
        let built = solve_constrained(eps, PolarPoint::new(1.0, theta_f).unwrap()).unwrap();
        assert!((best - built.tof.value()).abs() < 1e-9, "{best} vs {}", built.tof);
        for f in [0.2, 0.4, 0.6, 0.8, 0.95] {
            let t = family_time(eps, f * d_eps, theta_f).unwrap().value();
            assert!(t > best, "D = {} gives {t} <= {best}", f * d_eps);
        }
    }

    #[test]
    fn time_is_continuous_across_tangency() {
        let eps = 0.5;
        let (_, theta_c) = tangent_params(eps).unwrap();
        let edge = 2.0 * theta_c;
        let smooth = solve_constrained(eps, PolarPoint::new(1.0, edge - 1e-9).unwrap()).unwrap();
        let ride = solve_constrained(eps, PolarPoint::new(1.0, edge + 1e-9).unwrap()).unwrap();
        assert_eq!(smooth.regime, Regime::SmoothInterior);
        assert_eq!(ride.regime, Regime::TangentArc);
        assert!((smooth.tof.value() - ride.tof.value()).abs() < 1e-6);
    }

    #[test]
    fn family_curves_match_family_times() {
        for &(d, theta_f) in &[(0.0204, 2.0 * PI / 3.0), (0.125, 2.0 * PI / 3.0), (0.08, 2.5)] {
            let c = family_curve(0.5, d, theta_f, 400).unwrap();
            let t = family_time(0.5, d, theta_f).unwrap().value();
            assert!((c.total_time() - t).abs() < 1e-9, "{d}: {} vs {t}", c.total_time());
            let end = c.last_point();
            assert!((end.norm() - 1.0).abs() < 1e-12 && (end.angle() - theta_f).abs() < 1e-9);
            assert!(c.min_radius() >= 0.5 - 1e-12);
        }
        assert!(family_curve(0.5, 0.2, 2.0, 100).is_err());
    }

    #[test]
    fn convergence_both_cases() {
        let rows = convergence_study(PI / 3.0, &[0.4, 0.2, 0.1]).unwrap();
        for row in &rows {
            if row.theta_c >= PI / 6.0 {
                assert!(row.distance < 1e-12, "{row:?}");
            }
        }
        let rows = convergence_study(3.0 * PI / 4.0, &[0.4, 0.2, 0.1, 0.05]).unwrap();
        for w in rows.windows(2) {
            assert!(w[1].distance < w[0].distance, "{rows:?}");
        }
        assert!(rows[3].distance < 0.1, "{rows:?}");
    }
}
