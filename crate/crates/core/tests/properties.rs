use brachisto_core::geom::{distance_to_polyline, tof_sampled, CartPoint, SampledCurve};
use brachisto_core::oracle::{oracle_min_time, GridGraph};
use brachisto_core::strong::{
    critical_radius, d_from_rc, max_angle, sample_strong, sample_strong_with, shoot, slope, tof_strong,
    Branch, Spacing, StrongSolution, SECTOR_LIMIT,
};
use brachisto_core::variational::{monotonize, symmetrize};
use brachisto_core::weak::{sample_weak, tof_weak, WeakSolution};
use brachisto_core::PolarPoint;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn log_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| 10f64.powf(-6.0 + 9.0 * k as f64 / (n - 1) as f64)).collect()
}

fn wiggly(rng: &mut ChaCha8Rng, n: usize) -> SampledCurve {
    let r_min: f64 = rng.gen_range(0.2..0.8);
    let theta_f: f64 = rng.gen_range(-2.5..2.5);
    let pts = (0..n)
        .map(|i| {
            let s = i as f64 / (n - 1) as f64;
            let r = 1.0 - (1.0 - r_min) * (1.0 - (2.0 * s - 1.0).powi(2));
            let th = theta_f * s + 0.3 * rng.gen_range(-1.0..1.0) * s * (1.0 - s);
            CartPoint::from_polar(r, if i == 0 { 0.0 } else { th })
        })
        .collect();
    SampledCurve::from_polyline(pts).unwrap()
}

#[test]
fn critical_radius_is_a_bijection() {
    let ds = log_grid(50);
    let rcs: Vec<f64> = ds.iter().map(|&d| critical_radius(d).unwrap()).collect();
    for w in rcs.windows(2) {
        assert!(w[1] > w[0]);
    }
    for (&d, &rc) in ds.iter().zip(&rcs) {
        assert!((d_from_rc(rc).unwrap() - d).abs() <= 1e-10 * d.max(1.0), "{d}");
    }
}

#[test]
fn maximal_angle_decreases_inside_the_sector() {
    let angles: Vec<f64> = log_grid(50).iter().map(|&d| max_angle(d).unwrap()).collect();
    for w in angles.windows(2) {
        assert!(w[1] < w[0]);
    }
    assert!(angles.iter().all(|&a| a > 0.0 && a < SECTOR_LIMIT));
}

#[test]
fn strong_samples_stay_in_the_sector() {
    for &d in &log_grid(12) {
        for branch in [Branch::Positive, Branch::Negative] {
            let c = sample_strong(&StrongSolution::from_d(d, branch).unwrap(), 401).unwrap();
            assert!(c.points().all(|p| p.angle().abs() <= SECTOR_LIMIT + 1e-6), "{d}");
        }
    }
}

#[test]
fn apex_is_tangent_to_the_circle() {
    for &d in &[1e-3, 0.05, 0.23, 4.0] {
        let r_c = critical_radius(d).unwrap();
        assert!(slope(d, r_c + 1e-6).abs() > 1e2, "{d}");
    }
}

#[test]
fn tof_sampled_converges_at_second_order() {
    let sol = shoot(1.3).unwrap();
    let exact = tof_strong(&sol).unwrap().value();
    let errs: Vec<f64> = [201, 401, 801]
        .iter()
        .map(|&n| {
            let c = sample_strong_with(&sol, n, Spacing::UniformPsi).unwrap();
            (tof_sampled(&c).unwrap().value() - exact).abs()
        })
        .collect();
    assert!(errs[1] < errs[0] / 3.0 && errs[2] < errs[1] / 3.0, "{errs:?}");
}

#[test]
fn weak_time_is_independent_of_the_angle() {
    let base = tof_weak(&WeakSolution::new(2.2, 1.0).unwrap()).value();
    for th in [-PI, -2.5, 2.9, PI] {
        assert_eq!(tof_weak(&WeakSolution::new(th, 1.0).unwrap()).value(), base);
    }
}

#[test]
fn weak_curves_beat_every_grid_path_beyond_the_sector() {
    let g = GridGraph::new(100, 200, 0.0).unwrap();
    for th in [2.2, 2.6, 3.0, PI] {
        let grid = oracle_min_time(&g, PolarPoint::new(1.0, th).unwrap()).unwrap().value();
        assert!(PI <= grid + 1e-9, "{th}: {grid}");
    }
}

#[test]
fn weak_curves_foliate_the_disk() {
    let n_curves = 64;
    let curves: Vec<SampledCurve> = (0..n_curves)
        .map(|k| {
            let th = -PI + 2.0 * PI * k as f64 / n_curves as f64;
            sample_weak(&WeakSolution::new(th, 1.0).unwrap(), 201).unwrap()
        })
        .collect();
    for i in 1..=100 {
        let r = i as f64 / 100.0;
        for j in 0..100 {
            let p = CartPoint::from_polar(r, -PI + 2.0 * PI * j as f64 / 100.0);
            let near = curves.iter().map(|c| distance_to_polyline(p, c)).fold(f64::INFINITY, f64::min);
            assert!(near <= 2.0 * PI / n_curves as f64 * r + 1e-12, "{p:?}");
        }
    }
}

#[test]
fn monotonize_never_costs_time() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let c = wiggly(&mut rng, 60);
        let m = monotonize(&c).unwrap();
        assert!(tof_sampled(&m).unwrap().value() <= tof_sampled(&c).unwrap().value() + 1e-12);
        let (a, b) = symmetrize(&m).unwrap();
        let lhs = tof_sampled(&a).unwrap().value() + tof_sampled(&b).unwrap().value();
        assert!((lhs - 2.0 * tof_sampled(&m).unwrap().value()).abs() < 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn shooting_is_consistent(theta_f in 0.01f64..2.09) {
        let sol = shoot(theta_f).unwrap();
        prop_assert!((max_angle(sol.d).unwrap() - theta_f).abs() < 1e-8);
        let flipped = shoot(-theta_f).unwrap();
        prop_assert_eq!(flipped.branch, Branch::Negative);
        prop_assert!((tof_strong(&flipped).unwrap().value() - tof_strong(&sol).unwrap().value()).abs() < 1e-12);
    }

    #[test]
    fn travel_time_ignores_rotation_and_reflection(seed in 0u64..1000, angle in -PI..PI) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = wiggly(&mut rng, 40);
        let t = tof_sampled(&c).unwrap().value();
        prop_assert!((tof_sampled(&c.rotated(angle)).unwrap().value() - t).abs() < 1e-10);
        prop_assert!((tof_sampled(&c.reflected()).unwrap().value() - t).abs() < 1e-12);
    }
}
