use brachisto_core::field::value_grid;
use brachisto_core::oracle::{GridGraph, Stencil};
use brachisto_core::PolarPoint;
use std::f64::consts::PI;

/// Value grid against the grid-graph bound on a 10 x 10 set of probes.
fn agreement(eps: f64) -> f64 {
    let v = value_grid(eps, 200, 400, 128).unwrap();
    let g = GridGraph::with_stencil(200, 400, eps, Stencil::refinement(1)).unwrap();
    let labels = g.labels();
    let mut worst = 0.0_f64;
    for a in 0..10 {
        let r = eps + (1.0 - eps) * (0.1 + 0.08 * a as f64);
        for b in 0..10 {
            let theta = -PI + 2.0 * PI * (b as f64 + 0.5) / 10.0;
            let oracle = labels.query(PolarPoint::new(r, theta).unwrap()).unwrap().value();
            let field = v.interpolate(r, theta);
            worst = worst.max((field - oracle).abs() / oracle);
        }
    }
    worst
}

#[test]
fn value_grid_agrees_with_the_oracle_on_the_disk() {
    let worst = agreement(0.0);
    assert!(worst <= 0.05, "{worst}");
}

#[test]
fn value_grid_agrees_with_the_oracle_on_the_annulus() {
    let worst = agreement(0.5);
    assert!(worst <= 0.05, "{worst}");
}

#[test]
fn value_grid_is_deterministic() {
    let a = value_grid(0.3, 64, 128, 64).unwrap();
    let b = value_grid(0.3, 64, 128, 64).unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
}
