//! Smooth solutions of the Euler-Lagrange equations.
//!
//! A strong solution is fixed by its integration constant `D > 0`. It falls
//! from `(1, 0)` to the critical radius `r_c(D)`, the unique root of
//! `g(r) = r^3 + 2 D r - 2 D` in (0, 1), and climbs back to the rim as a mirror
//! image. Along the descending half
//!
//! ```text
//! dtheta/dr = -sqrt(2 D (1 - r) / (r^2 g(r)))
//! ```
//!
//! All integrals are taken in the variable `psi` with
//! `r = r_c + (1 - r_c) sin^2 psi`. Writing `g(r) = (r - r_c) q(r)` with
//! `q(r) = r^2 + r r_c + r_c^2 + 2 D`, both the angle and the time integrands
//! become smooth on [0, pi/2]:
//!
//! ```text
//! dtheta = 2 sqrt(2 D) (1 - r_c) cos^2 psi / (r sqrt q) dpsi
//! dt     = 2 r^2 / sqrt q dpsi
//! ```

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

use crate::geom::{CartPoint, GeomError, Sample, SampledCurve, TimeOfFlight};
use crate::quad::integrate;

/// Supremum of the terminal angles reachable by strong solutions.
pub const SECTOR_LIMIT: f64 = 2.0 * PI / 3.0;

const ANGLE_TOL: f64 = 1e-12;
const TIME_TOL: f64 = 1e-11;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StrongError {
    #[error("integration constant must be positive, got {0}")]
    NonPositiveD(f64),
    #[error("{what} = {value} outside its valid range")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("terminal angle {0} is not reachable by a strong solution (|theta_f| must lie in (0, 2pi/3))")]
    OutOfSector(f64),
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("shooting did not bracket the target angle {0}")]
    NoBracket(f64),
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// Which of the two mirror-image branches; the sign of the terminal angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Positive,
    Negative,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        }
    }

    pub fn of(angle: f64) -> Branch {
        if angle < 0.0 {
            Branch::Negative
        } else {
            Branch::Positive
        }
    }

    pub fn flipped(self) -> Branch {
        match self {
            Branch::Positive => Branch::Negative,
            Branch::Negative => Branch::Positive,
        }
    }
}

/// Half of a strong solution: before or after the critical radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Half {
    Descending,
    Ascending,
}

/// Parameter block of one member of the smooth family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StrongSolution {
    pub d: f64,
    pub r_c: f64,
    pub branch: Branch,
    pub theta_f: f64,
}

impl StrongSolution {
    pub fn from_d(d: f64, branch: Branch) -> Result<Self, StrongError> {
        let r_c = critical_radius(d)?;
        let theta_f = branch.sign() * max_angle(d)?;
        Ok(StrongSolution { d, r_c, branch, theta_f })
    }

    /// Angle of the apex (the point at the critical radius).
    pub fn apex_angle(&self) -> f64 {
        0.5 * self.theta_f
    }

    pub fn flipped(&self) -> Self {
        StrongSolution { branch: self.branch.flipped(), theta_f: -self.theta_f, ..*self }
    }
}

fn check_d(d: f64) -> Result<(), StrongError> {
    if d > 0.0 && d.is_finite() {
        Ok(())
    } else {
        Err(StrongError::NonPositiveD(d))
    }
}

/// Unique root of `r^3 + 2 D r - 2 D` in (0, 1).
pub fn critical_radius(d: f64) -> Result<f64, StrongError> {
    check_d(d)?;
    let g = |r: f64| r * r * r + 2.0 * d * (r - 1.0);
    // g(0) = -2D < 0 and g(1) = 1 > 0; g is increasing.
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi.max(1e-300) {
            break;
        }
    }
    // Newton polish, kept only while it improves the residual inside the bracket.
    let mut r = 0.5 * (lo + hi);
    for _ in 0..3 {
        let step = g(r) / (3.0 * r * r + 2.0 * d);
        let next = r - step;
        if next > lo && next < hi && g(next).abs() <= g(r).abs() {
            r = next;
        } else {
            break;
        }
    }
    Ok(r)
}

/// Inverse map `D(r_c) = r_c^3 / (2 (1 - r_c))`.
pub fn d_from_rc(r_c: f64) -> Result<f64, StrongError> {
    if !(r_c > 0.0 && r_c < 1.0) {
        return Err(StrongError::OutOfRange { what: "critical radius", value: r_c });
    }
    Ok(r_c * r_c * r_c / (2.0 * (1.0 - r_c)))
}

/// `|dtheta/dr|` on a strong solution at radius `r` (diverges at `r_c`).
pub fn slope(d: f64, r: f64) -> f64 {
    let g = r * r * r + 2.0 * d * (r - 1.0);
    (2.0 * d * (1.0 - r) / (r * r * g)).sqrt()
}

/// The `psi` coordinate of radius `r` on a solution with critical radius `r_c`.
pub fn psi_of_r(r_c: f64, r: f64) -> f64 {
    let x = ((r - r_c) / (1.0 - r_c)).clamp(0.0, 1.0);
    x.sqrt().asin()
}

pub fn r_of_psi(r_c: f64, psi: f64) -> f64 {
    let s = psi.sin();
    r_c + (1.0 - r_c) * s * s
}

struct Integrands {
    d: f64,
    r_c: f64,
}

impl Integrands {
    fn new(d: f64, r_c: f64) -> Self {
        Integrands { d, r_c }
    }

    fn q(&self, r: f64) -> f64 {
        r * r + r * self.r_c + self.r_c * self.r_c + 2.0 * self.d
    }

    fn angle(&self, psi: f64) -> f64 {
        let r = r_of_psi(self.r_c, psi);
        let c = psi.cos();
        2.0 * (2.0 * self.d).sqrt() * (1.0 - self.r_c) * c * c / (r * self.q(r).sqrt())
    }

    fn time(&self, psi: f64) -> f64 {
        let r = r_of_psi(self.r_c, psi);
        2.0 * r * r / self.q(r).sqrt()
    }

    fn angle_between(&self, psi_lo: f64, psi_hi: f64) -> f64 {
        integrate(|p| self.angle(p), psi_lo, psi_hi, ANGLE_TOL).value
    }

    fn time_between(&self, psi_lo: f64, psi_hi: f64) -> f64 {
        integrate(|p| self.time(p), psi_lo, psi_hi, TIME_TOL).value
    }
}

/// Unsigned angle swept on the descending half from the rim down to `r`.
fn descending_angle(d: f64, r_c: f64, r: f64) -> f64 {
    Integrands::new(d, r_c).angle_between(psi_of_r(r_c, r), FRAC_PI_2)
}

/// Maximum angular coordinate `theta_bar(D)` reached by the solution.
pub fn max_angle(d: f64) -> Result<f64, StrongError> {
    let r_c = critical_radius(d)?;
    Ok(2.0 * Integrands::new(d, r_c).angle_between(0.0, FRAC_PI_2))
}

/// Angle on `sol` at radius `r`, on the requested half.
pub fn theta_of_r(sol: &StrongSolution, r: f64, half: Half) -> Result<f64, StrongError> {
    if r < sol.r_c - 1e-12 || r > 1.0 + 1e-12 || r.is_nan() {
        return Err(StrongError::OutOfRange { what: "radius", value: r });
    }
    let r = r.clamp(sol.r_c, 1.0);
    let desc = descending_angle(sol.d, sol.r_c, r);
    let sign = sol.branch.sign();
    Ok(match half {
        Half::Descending => sign * desc,
        Half::Ascending => sol.theta_f - sign * desc,
    })
}

/// Time to fall from the rim to radius `r` along the descending half.
pub fn descent_time(sol: &StrongSolution, r: f64) -> Result<f64, StrongError> {
    if r < sol.r_c - 1e-12 || r > 1.0 + 1e-12 || r.is_nan() {
        return Err(StrongError::OutOfRange { what: "radius", value: r });
    }
    let psi = psi_of_r(sol.r_c, r.clamp(sol.r_c, 1.0));
    Ok(Integrands::new(sol.d, sol.r_c).time_between(psi, FRAC_PI_2))
}

/// Total time of flight of a strong solution.
pub fn tof_strong(sol: &StrongSolution) -> Result<TimeOfFlight, StrongError> {
    check_d(sol.d)?;
    Ok(TimeOfFlight(2.0 * Integrands::new(sol.d, sol.r_c).time_between(0.0, FRAC_PI_2)))
}

/// Find the solution ending at `(1, theta_f)` by bisection on `log D`.
pub fn shoot(theta_f: f64) -> Result<StrongSolution, StrongError> {
    let target = theta_f.abs();
    if !(target > 0.0) || target >= SECTOR_LIMIT - 1e-9 || !target.is_finite() {
        return Err(StrongError::OutOfSector(theta_f));
    }
    let angle = |log_d: f64| max_angle(log_d.exp());
    // theta_bar decreases in D; widen until the target is bracketed.
    let (mut lo, mut hi) = (1e-9_f64.ln(), 1e6_f64.ln());
    while angle(lo)? < target {
        lo -= 5.0;
        if lo < -650.0 {
            return Err(StrongError::NoBracket(theta_f));
        }
    }
    while angle(hi)? > target {
        hi += 5.0;
        if hi > 650.0 {
            return Err(StrongError::NoBracket(theta_f));
        }
    }
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let a = angle(mid)?;
        if (a - target).abs() < 1e-10 {
            break;
        }
        if a > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    StrongSolution::from_d(mid.exp(), Branch::of(theta_f))
}

/// Find the solution whose descending half passes through the polar point
/// `(r, theta)`, for `0 < |theta| <` the tangent angle at radius `r`.
pub fn shoot_through(r: f64, theta: f64) -> Result<StrongSolution, StrongError> {
    if !(r > 0.0 && r < 1.0) {
        return Err(StrongError::OutOfRange { what: "radius", value: r });
    }
    let target = theta.abs();
    let d_max = d_from_rc(r)?;
    let apex = 0.5 * max_angle(d_max)?;
    if !(target > 0.0) || target > apex {
        return Err(StrongError::OutOfRange { what: "angle", value: theta });
    }
    if target == apex {
        return StrongSolution::from_d(d_max, Branch::of(theta));
    }
    let angle = |log_d: f64| -> Result<f64, StrongError> {
        let d = log_d.exp();
        Ok(descending_angle(d, critical_radius(d)?, r))
    };
    let mut lo = (d_max * 1e-6).ln();
    let hi0 = d_max.ln();
    while angle(lo)? > target {
        lo -= 5.0;
        if lo < -650.0 {
            return Err(StrongError::NoBracket(theta));
        }
    }
    let mut hi = hi0;
    let mut mid = 0.5 * (lo + hi);
    for _ in 0..200 {
        mid = 0.5 * (lo + hi);
        let a = angle(mid)?;
        if (a - target).abs() < 1e-11 {
            break;
        }
        if a < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    StrongSolution::from_d(mid.exp().min(d_max), Branch::of(theta))
}

/// Unsigned descending angle and fall time at each of `radii`, which must lie
/// in `[r_c, 1]`. One pass of short integrals between consecutive radii.
pub fn descending_profile(sol: &StrongSolution, radii: &[f64]) -> Vec<(f64, f64)> {
    let ints = Integrands::new(sol.d, sol.r_c);
    let mut order: Vec<usize> = (0..radii.len()).collect();
    let psis: Vec<f64> = radii.iter().map(|&r| psi_of_r(sol.r_c, r)).collect();
    // From the rim (psi = pi/2) inwards.
    order.sort_by(|&a, &b| psis[b].total_cmp(&psis[a]));
    let mut out = vec![(0.0, 0.0); radii.len()];
    let (mut prev, mut angle, mut time) = (FRAC_PI_2, 0.0, 0.0);
    for idx in order {
        let psi = psis[idx];
        if psi < prev {
            angle += integrate(|p| ints.angle(p), psi, prev, 1e-14).value;
            time += integrate(|p| ints.time(p), psi, prev, 1e-14).value;
            prev = psi;
        }
        out[idx] = (angle, time);
    }
    out
}

/// How samples are placed along a strong solution. The parameter `s` always
/// follows the affine-in-radius convention (`r = 1 - 2 (1 - r_c) s` on the
/// first half); only the sample locations differ.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    /// Samples evenly spaced in `s`.
    UniformS,
    /// Samples evenly spaced in `psi`; dense near the rim and the apex.
    UniformPsi,
}

/// Sample a strong solution with `n` points, evenly spaced in `s`.
pub fn sample_strong(sol: &StrongSolution, n: usize) -> Result<SampledCurve, StrongError> {
    sample_strong_with(sol, n, Spacing::UniformS)
}

pub fn sample_strong_with(
    sol: &StrongSolution,
    n: usize,
    spacing: Spacing,
) -> Result<SampledCurve, StrongError> {
    if n < 3 {
        return Err(StrongError::TooFewSamples { min: 3, got: n });
    }
    let r_c = sol.r_c;
    // (s, half, r)
    let nodes: Vec<(f64, Half, f64)> = match spacing {
        Spacing::UniformS => (0..n)
            .map(|i| {
                let s = i as f64 / (n - 1) as f64;
                if s <= 0.5 {
                    (s, Half::Descending, 1.0 - 2.0 * (1.0 - r_c) * s)
                } else {
                    (s, Half::Ascending, r_c + 2.0 * (1.0 - r_c) * (s - 0.5))
                }
            })
            .collect(),
        Spacing::UniformPsi => {
            let m = (n - 1) / 2;
            let mut v = Vec::with_capacity(2 * m + 1);
            for k in 0..=m {
                let r = r_of_psi(r_c, FRAC_PI_2 * (1.0 - k as f64 / m as f64));
                v.push(((1.0 - r) / (2.0 * (1.0 - r_c)), Half::Descending, r));
            }
            for k in 1..=m {
                let r = r_of_psi(r_c, FRAC_PI_2 * k as f64 / m as f64);
                v.push((0.5 + (r - r_c) / (2.0 * (1.0 - r_c)), Half::Ascending, r));
            }
            v
        }
    };
    let radii: Vec<f64> = nodes.iter().map(|n| n.2).collect();
    let prof = descending_profile(sol, &radii);
    let half_time = descending_profile(sol, &[r_c])[0].1;
    let total_time = 2.0 * half_time;
    let sign = sol.branch.sign();
    let last = nodes.len() - 1;
    let samples = nodes
        .iter()
        .zip(prof)
        .enumerate()
        .map(|(i, (&(s, half, r), (angle, time)))| {
            let (theta, t_cum) = match half {
                Half::Descending => (sign * angle, time),
                Half::Ascending => (sol.theta_f - sign * angle, total_time - time),
            };
            let point = if i == 0 {
                CartPoint::new(1.0, 0.0)
            } else if i == last {
                CartPoint::from_polar(1.0, sol.theta_f)
            } else {
                CartPoint::from_polar(r, theta)
            };
            let s = if i == last { 1.0 } else { s };
            Sample { s, point, t_cum }
        })
        .collect();
    Ok(SampledCurve::from_samples(samples)?)
}
