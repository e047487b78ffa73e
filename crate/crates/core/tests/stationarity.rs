//! First-variation checks on the constrained minimiser through the obstacle.

use brachisto_core::annulus::solve_constrained;
use brachisto_core::geom::PolarPoint;
use brachisto_core::variational::{
    first_variation_angular, first_variation_radial, polar_samples, radial_gradient,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn bumps(s: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
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

#[test]
fn constrained_minimiser_is_stationary() {
    let eps = 0.5;
    let sol = solve_constrained(eps, PolarPoint::new(1.0, 2.0 * PI / 3.0).unwrap()).unwrap();
    let c = &sol.curve;
    let s: Vec<f64> = c.samples().iter().map(|x| x.s).collect();
    let (radii, _) = polar_samples(c);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut worst_r, mut worst_a) = (f64::INFINITY, 0.0_f64);
    for _ in 0..50 {
        let d = bumps(&s, &mut rng);
        let q: Vec<f64> = radii.iter().zip(&d).map(|(r, d)| (r + 0.05 * d).clamp(eps, 1.0)).collect();
        let v = first_variation_radial(c, &q, eps).unwrap();
        worst_r = worst_r.min(v);
        let xi = bumps(&s, &mut rng);
        let w = first_variation_angular(c, &xi).unwrap();
        worst_a = worst_a.max(w.abs());
    }
    println!("worst radial {worst_r:e}, worst angular {worst_a:e}");
    assert!(worst_r >= -1e-4);
    assert!(worst_a <= 1e-4);
    // Pushing the ride outwards costs time.
    let grad = radial_gradient(c);
    let contact: Vec<f64> =
        radii.iter().zip(&grad).filter(|(r, _)| (**r - eps).abs() < 1e-12).map(|(_, g)| *g).collect();
    assert!(!contact.is_empty());
    assert!(contact.iter().all(|&g| g > 0.0));
}

#[test]
fn library_report_matches_the_direct_check() {
    use brachisto_core::variational::stationarity_check;
    let sol = solve_constrained(0.5, PolarPoint::new(1.0, 2.0 * PI / 3.0).unwrap()).unwrap();
    let report = stationarity_check(&sol.curve, 0.5, 50, 2024).unwrap();
    assert_eq!(report.trials, 50);
    assert!(report.worst_radial >= -1e-4 && report.worst_angular <= 1e-4);
    assert!(report.contact_samples > 0 && report.contact_gradient > 0.0);
}
