//! Subcommand bodies. Each returns a [`Report`]; nothing is written here.

use anyhow::{bail, Context, Result};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};

use brachisto_core::annulus::{
    convergence_study, family_curve, foliate_annulus_with, solve_constrained, solve_constrained_with,
    tangent_params, AnnulusSolution,
};
use brachisto_core::field::{eikonal_residual, value_grid, FieldError, ValueGrid};
use brachisto_core::geom::{radial_antiderivative, tof_sampled, CartPoint, PolarPoint, SampledCurve};
use brachisto_core::oracle::{oracle_min_time, GridGraph, Stencil};
use brachisto_core::strong::{
    descent_time, max_angle, sample_strong_with, shoot, shoot_through, tof_strong, Branch, Spacing,
    StrongSolution, SECTOR_LIMIT,
};
use brachisto_core::variational::stationarity_check;
use brachisto_core::weak::{corner_residual, sample_weak, DiskSolution, WeakSolution};

use crate::svg::Svg;
use crate::{Cli, Command, Figure, Report};

const CURVE_COLOR: &str = "#1f4e9c";
const ALT_COLOR: &str = "#b03a2e";

pub fn parse_stencil(s: &str) -> Result<Stencil, String> {
    let bad = || format!("unknown stencil {s:?}; use sixteen, primitive:K or nested:LEVEL");
    match s.split_once(':') {
        None if s == "sixteen" => Ok(Stencil::Sixteen),
        Some(("primitive", k)) => k.parse().map(Stencil::Primitive).map_err(|_| bad()),
        Some(("nested", l)) => l.parse().map(Stencil::refinement).map_err(|_| bad()),
        _ => Err(bad()),
    }
}

pub fn run(cli: &Cli) -> Result<Report> {
    let angle = |x: f64| if cli.degrees { x.to_radians() } else { x };
    match cli.command {
        Command::Solve { theta_f, epsilon, terminal_r, samples } => {
            solve(cli, angle(theta_f), epsilon, terminal_r, samples)
        }
        Command::Foliate { count, epsilon, samples } => foliate(cli, count, epsilon, samples),
        Command::Value { epsilon, nr, ntheta, curves, svg } => value(cli, epsilon, nr, ntheta, curves, svg),
        Command::Oracle { epsilon, target_r, target_theta, nr, ntheta, stencil } => {
            oracle(cli, epsilon, PolarPoint::new(target_r, angle(target_theta))?, nr, ntheta, stencil)
        }
        Command::Converge { theta_f, ref eps } => converge(cli, angle(theta_f), eps),
        Command::Check { stationarity, epsilon, theta_f, trials, seed, .. } => {
            if stationarity {
                check_stationarity(cli, epsilon, angle(theta_f), trials, seed)
            } else {
                check_corner(cli, angle(theta_f))
            }
        }
        Command::Repro { figure } => repro(cli, figure),
    }
}

/// Defaults overridden by `--tol`; unknown names are usage errors.
fn tolerances(cli: &Cli, defaults: &[(&str, f64)]) -> Result<BTreeMap<String, f64>> {
    let mut out: BTreeMap<String, f64> = defaults.iter().map(|&(k, v)| (k.to_string(), v)).collect();
    for (name, value) in &cli.tol {
        match out.get_mut(name) {
            Some(slot) => *slot = *value,
            None => bail!(
                "unknown tolerance {name:?} for this command; known: {}",
                defaults.iter().map(|d| d.0).collect::<Vec<_>>().join(", ")
            ),
        }
    }
    Ok(out)
}

fn report(
    command: &'static str,
    params: Value,
    results: Value,
    tolerances: BTreeMap<String, f64>,
    files: Vec<(String, String)>,
    passed: bool,
) -> Report {
    Report { command, json_name: format!("{command}.json"), params, results, tolerances, files, passed }
}

/// All curves in one CSV, with a leading curve index column.
fn curves_csv(curves: &[SampledCurve]) -> String {
    let mut out = String::from("curve,s,x,y,r,theta,t_cum\n");
    for (k, c) in curves.iter().enumerate() {
        for line in c.to_csv().lines().skip(1) {
            out.push_str(&format!("{k},{line}\n"));
        }
    }
    out
}

fn relative_gap(discrete: f64, exact: f64) -> f64 {
    if exact == 0.0 {
        discrete.abs()
    } else {
        (discrete - exact).abs() / exact
    }
}

fn solve(cli: &Cli, theta: f64, eps: f64, terminal_r: f64, samples: usize) -> Result<Report> {
    let tol = tolerances(cli, &[("tof", 1e-3)])?;
    let params = json!({"theta_f": theta, "epsilon": eps, "terminal_r": terminal_r, "samples": samples});
    let (results, curve, tof) = if eps == 0.0 {
        if terminal_r != 1.0 {
            bail!("--terminal-r applies only with --epsilon > 0");
        }
        let sol = DiskSolution::solve(theta)?;
        let curve = sol.sample(samples)?;
        let tof = sol.tof()?.value();
        let mut r = json!({"family": sol.family(), "theta_f": sol.theta_f(), "tof": tof});
        match sol {
            DiskSolution::Strong(s) => {
                r["D"] = json!(s.d);
                r["r_c"] = json!(s.r_c);
            }
            DiskSolution::Weak(w) => r["r_f"] = json!(w.r_f),
        }
        (r, curve, tof)
    } else {
        let sol = solve_constrained_with(eps, PolarPoint::new(terminal_r, theta)?, samples)?;
        let (_, theta_c) = tangent_params(eps)?;
        let tof = sol.tof.value();
        (annulus_summary(&sol, theta_c), sol.curve, tof)
    };
    let discrete = tof_sampled(&curve)?.value();
    let gap = relative_gap(discrete, tof);
    let mut results = results;
    results["tof_sampled"] = json!(discrete);
    results["relative_gap"] = json!(gap);
    let passed = gap <= tol["tof"];
    Ok(report("solve", params, results, tol, vec![("solve.csv".into(), curve.to_csv())], passed))
}

fn annulus_summary(sol: &AnnulusSolution, theta_c: f64) -> Value {
    json!({
        "family": "constrained",
        "regime": sol.regime,
        "region": sol.regime.region(),
        "terminal": {"r": sol.terminal.r, "theta": sol.terminal.theta},
        "D": sol.entry.map(|e| e.d),
        "theta_c": theta_c,
        "arc_span": sol.arc_span,
        "tof": sol.tof.value(),
    })
}

/// Terminal angles at the midpoints of `count` equal arcs of `(-pi, pi)`,
/// leaving out `0`, which is the release point itself.
fn rim_angles(count: usize) -> Vec<f64> {
    (0..count).map(|k| -PI + 2.0 * PI * (k as f64 + 0.5) / count as f64).filter(|t| t.abs() > 1e-12).collect()
}

fn foliate(cli: &Cli, count: usize, eps: f64, samples: usize) -> Result<Report> {
    let tol = tolerances(cli, &[("tof", 1e-3)])?;
    if count == 0 {
        bail!("--count must be positive");
    }
    let params = json!({"count": count, "epsilon": eps, "samples": samples});
    let mut index = Vec::new();
    let mut curves = Vec::new();
    let mut exact = Vec::new();
    if eps == 0.0 {
        for theta in rim_angles(count) {
            let sol = DiskSolution::solve(theta)?;
            let tof = sol.tof()?.value();
            let (d, r_c) = match sol {
                DiskSolution::Strong(s) => (Some(s.d), Some(s.r_c)),
                DiskSolution::Weak(_) => (None, None),
            };
            index.push(json!({"family": sol.family(), "theta_f": theta, "D": d, "r_c": r_c, "tof": tof}));
            curves.push(sol.sample(samples)?);
            exact.push(tof);
        }
    } else {
        let (_, theta_c) = tangent_params(eps)?;
        for sol in foliate_annulus_with(eps, count, samples)? {
            index.push(annulus_summary(&sol, theta_c));
            exact.push(sol.tof.value());
            curves.push(sol.curve);
        }
    }
    let mut worst = 0.0_f64;
    for (c, &t) in curves.iter().zip(&exact) {
        worst = worst.max(relative_gap(tof_sampled(c)?.value(), t));
    }
    let mut files: Vec<(String, String)> =
        curves.iter().enumerate().map(|(k, c)| (format!("curve_{k:03}.csv"), c.to_csv())).collect();
    files.push(("index.json".into(), serde_json::to_string_pretty(&index)? + "\n"));
    let mut svg = Svg::new();
    svg.disk(eps);
    for c in &curves {
        svg.curve(c, CURVE_COLOR);
    }
    files.push(("foliate.svg".into(), svg.finish()));
    let results = json!({"curves": index, "worst_relative_gap": worst});
    let passed = worst <= tol["tof"];
    Ok(report("foliate", params, results, tol, files, passed))
}

fn value_summary(v: &ValueGrid) -> Result<Value> {
    let residual = match eikonal_residual(v) {
        Ok((max, _)) => Some(max),
        Err(FieldError::GridTooCoarse(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let count = |f: &str| v.source_mask.iter().filter(|m| m.name() == f).count();
    Ok(json!({
        "eikonal_max": residual,
        "nodes": v.values.len(),
        "value_min": v.values.iter().copied().fold(f64::INFINITY, f64::min),
        "value_max": v.values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        "families": {"strong": count("strong"), "weak": count("weak"), "constrained": count("constrained")},
    }))
}

fn value(cli: &Cli, eps: f64, nr: usize, ntheta: usize, n_curves: usize, svg: bool) -> Result<Report> {
    let tol = tolerances(cli, &[("eikonal", 0.05)])?;
    let params = json!({"epsilon": eps, "nr": nr, "ntheta": ntheta, "curves": n_curves});
    let v = value_grid(eps, nr, ntheta, n_curves)?;
    let results = value_summary(&v)?;
    let passed = results["eikonal_max"].as_f64().is_none_or(|m| m <= tol["eikonal"]);
    let mut files = vec![("value.csv".to_string(), v.to_csv())];
    if svg {
        files.push(("value.svg".into(), Svg::new().disk(eps).contours(&v).finish()));
    }
    Ok(report("value", params, results, tol, files, passed))
}

/// Minimal time from the analytic solvers, where one applies to `target`.
fn analytic_time(eps: f64, target: PolarPoint) -> Option<f64> {
    let (r, theta) = (target.r, target.theta);
    if eps > 0.0 {
        return solve_constrained(eps, target).ok().map(|s| s.tof.value());
    }
    if (r - 1.0).abs() < 1e-12 {
        if theta == 0.0 {
            return Some(0.0);
        }
        return DiskSolution::solve(theta).ok()?.tof().ok().map(|t| t.value());
    }
    if theta.abs() >= SECTOR_LIMIT || r == 0.0 {
        return Some(FRAC_PI_2 + radial_antiderivative(r));
    }
    if theta == 0.0 {
        return Some(radial_antiderivative(1.0) - radial_antiderivative(r));
    }
    let sol = shoot_through(r, theta).ok()?;
    descent_time(&sol, r).ok()
}

fn oracle(
    cli: &Cli,
    eps: f64,
    target: PolarPoint,
    nr: usize,
    ntheta: usize,
    stencil: Stencil,
) -> Result<Report> {
    let tol = tolerances(cli, &[("gap", 0.02), ("lower_bound", 1e-9)])?;
    let params = json!({
        "epsilon": eps,
        "target": {"r": target.r, "theta": target.theta},
        "nr": nr,
        "ntheta": ntheta,
        "stencil": stencil,
    });
    let g = GridGraph::with_stencil(nr, ntheta, eps, stencil)?;
    let time = oracle_min_time(&g, target)?.value();
    let analytic = analytic_time(eps, target);
    let gap = analytic.filter(|&a| a > 0.0).map(|a| time / a - 1.0);
    let passed = match (analytic, gap) {
        (Some(a), Some(g)) => time >= a - tol["lower_bound"] && g <= tol["gap"],
        _ => true,
    };
    let results = json!({
        "time": time,
        "analytic": analytic,
        "gap_vs_analytic": gap,
        "resolution": {"nr": nr, "ntheta": ntheta, "stencil": stencil},
    });
    Ok(report("oracle", params, results, tol, vec![], passed))
}

fn converge(cli: &Cli, theta: f64, eps: &[f64]) -> Result<Report> {
    let tol = tolerances(cli, &[("distance", 0.1), ("zero", 1e-9)])?;
    let params = json!({"theta_f": theta, "eps": eps});
    let rows = convergence_study(theta, eps)?;
    let all_zero = rows.iter().all(|r| r.distance <= tol["zero"]);
    let decreasing = rows.windows(2).all(|w| w[1].distance < w[0].distance);
    let last = rows.last().map_or(0.0, |r| r.distance);
    let passed = all_zero || (decreasing && last < tol["distance"]);
    let results = json!({
        "rows": rows,
        "all_zero": all_zero,
        "strictly_decreasing": decreasing,
        "final_distance": last,
    });
    Ok(report("converge", params, results, tol, vec![], passed))
}

fn check_stationarity(cli: &Cli, eps: f64, theta: f64, trials: usize, seed: u64) -> Result<Report> {
    let tol = tolerances(cli, &[("radial", 1e-4), ("angular", 1e-4)])?;
    let params =
        json!({"check": "stationarity", "epsilon": eps, "theta_f": theta, "trials": trials, "seed": seed});
    let sol = solve_constrained(eps, PolarPoint::new(1.0, theta)?)?;
    let r = stationarity_check(&sol.curve, eps, trials, seed)?;
    let passed = r.worst_radial >= -tol["radial"]
        && r.worst_angular <= tol["angular"]
        && (r.contact_samples == 0 || r.contact_gradient > 0.0);
    let results = json!({
        "regime": sol.regime,
        "trials": r.trials,
        "worst_radial": r.worst_radial,
        "worst_angular": r.worst_angular,
        "contact_samples": r.contact_samples,
        "contact_gradient": if r.contact_samples > 0 { Some(r.contact_gradient) } else { None },
    });
    Ok(report("check", params, results, tol, vec![], passed))
}

fn check_corner(cli: &Cli, theta: f64) -> Result<Report> {
    let tol = tolerances(cli, &[("corner", 1e-3)])?;
    let params = json!({"check": "corner", "theta_f": theta});
    let w = WeakSolution::new(theta, 1.0)?;
    let c = sample_weak(&w, 1001)?;
    let residual = corner_residual(&c, 0.5)?;
    let results = json!({"family": "weak", "corner": [0.0, 0.0], "residual": residual});
    let passed = residual < tol["corner"];
    Ok(report("check", params, results, tol, vec![], passed))
}

fn repro(cli: &Cli, figure: Figure) -> Result<Report> {
    let tol = tolerances(cli, &[])?;
    let (name, params, results, files) = match figure {
        Figure::Fig2 => fig2()?,
        Figure::Fig3 => fig3()?,
        Figure::Fig4 => fig4()?,
        Figure::Fig5 => fig5()?,
        Figure::Fig6 => fig6()?,
    };
    let mut r = report("repro", params, results, tol, files, true);
    r.json_name = format!("{name}.json");
    Ok(r)
}

type FigureData = (&'static str, Value, Value, Vec<(String, String)>);

/// Sixteen strong solutions with terminal angles evenly spaced in the sector,
/// with their critical points marked.
fn fig2() -> Result<FigureData> {
    let n = 16;
    let mut svg = Svg::new();
    svg.disk(0.0);
    let mut curves = Vec::new();
    let mut rows = Vec::new();
    for k in 0..n {
        let theta = -SECTOR_LIMIT + 2.0 * SECTOR_LIMIT * (k as f64 + 0.5) / n as f64;
        let sol = shoot(theta)?;
        let c = sample_strong_with(&sol, 401, Spacing::UniformPsi)?;
        svg.curve(&c, CURVE_COLOR);
        svg.dot(CartPoint::from_polar(sol.r_c, sol.branch.sign() * sol.apex_angle()), ALT_COLOR);
        rows.push(json!({"theta_f": theta, "D": sol.d, "r_c": sol.r_c, "tof": tof_strong(&sol)?.value()}));
        curves.push(c);
    }
    let files = vec![("fig2.csv".into(), curves_csv(&curves)), ("fig2.svg".into(), svg.finish())];
    Ok(("fig2", json!({"curves": n}), json!({"curves": rows}), files))
}

/// Weak solutions alone, then the full foliation over the value contours.
fn fig3() -> Result<FigureData> {
    let weak: Vec<SampledCurve> = (0..16)
        .map(|k| sample_weak(&WeakSolution::new(-PI + 2.0 * PI * k as f64 / 16.0, 1.0)?, 201))
        .collect::<Result<_, _>>()?;
    let mut a = Svg::new();
    a.disk(0.0);
    for c in &weak {
        a.curve(c, CURVE_COLOR);
    }
    let v = value_grid(0.0, 200, 400, 256)?;
    let mut b = Svg::new();
    b.disk(0.0).contours(&v);
    let mut full = Vec::new();
    for theta in rim_angles(32) {
        let c = DiskSolution::solve(theta)?.sample(401)?;
        b.curve(&c, CURVE_COLOR);
        full.push(c);
    }
    let files = vec![
        ("fig3a.csv".into(), curves_csv(&weak)),
        ("fig3a.svg".into(), a.finish()),
        ("fig3b.csv".into(), curves_csv(&full)),
        ("fig3b.svg".into(), b.finish()),
        ("fig3_value.csv".into(), v.to_csv()),
    ];
    let params =
        json!({"weak_curves": 16, "foliation_curves": full.len(), "grid": [200, 400], "value_curves": 256});
    Ok(("fig3", params, json!({"value": value_summary(&v)?}), files))
}

/// Three members of the obstacle family on the annulus `r >= 0.5`.
fn fig4() -> Result<FigureData> {
    let eps = 0.5;
    let (d_eps, theta_c) = tangent_params(eps)?;
    let third = 2.0 * PI / 3.0;
    let transversal = family_curve(eps, 0.0204, third, 300)?;
    // Clears the obstacle: the unconstrained strong curve for this D.
    let clear = StrongSolution::from_d(0.23, Branch::Positive)?;
    let clear_curve = sample_strong_with(&clear, 301, Spacing::UniformPsi)?;
    let tangent = solve_constrained(eps, PolarPoint::new(1.0, third)?)?;
    // Where the transversal member first meets the obstacle.
    let hit = transversal.points().find(|p| (p.norm() - eps).abs() < 1e-12).map(|p| p.angle());
    let panels = [
        (
            "a",
            &transversal,
            json!({"theta_f": third, "D": 0.0204, "contact_angle": hit, "tof": transversal.total_time()}),
        ),
        (
            "b",
            &clear_curve,
            json!({"theta_f": max_angle(clear.d)?, "D": clear.d, "r_c": clear.r_c, "tof": tof_strong(&clear)?.value()}),
        ),
        (
            "c",
            &tangent.curve,
            json!({"theta_f": third, "D": d_eps, "contact_angle": theta_c, "arc_span": tangent.arc_span, "tof": tangent.tof.value()}),
        ),
    ];
    let mut files = Vec::new();
    let mut rows = serde_json::Map::new();
    for (tag, c, row) in panels {
        let mut svg = Svg::new();
        svg.disk(eps).curve(c, CURVE_COLOR);
        files.push((format!("fig4{tag}.svg"), svg.finish()));
        rows.insert(tag.to_string(), row);
    }
    let curves = [transversal.clone(), clear_curve.clone(), tangent.curve.clone()];
    files.insert(0, ("fig4.csv".into(), curves_csv(&curves)));
    Ok(("fig4", json!({"epsilon": eps, "D": [0.0204, 0.23, 0.125]}), Value::Object(rows), files))
}

/// Curves ending on the rim, then those ending on the ray `theta = pi` and on
/// the obstacle, for `eps = 0.5`.
fn fig5() -> Result<FigureData> {
    let eps = 0.5;
    let sols = foliate_annulus_with(eps, 16, 401)?;
    let (rim, rest): (Vec<&AnnulusSolution>, Vec<&AnnulusSolution>) =
        sols.iter().partition(|s| s.regime.region() == "R2");
    let mut files =
        vec![("fig5.csv".to_string(), curves_csv(&sols.iter().map(|s| s.curve.clone()).collect::<Vec<_>>()))];
    for (tag, group) in [("a", &rim), ("b", &rest)] {
        let mut svg = Svg::new();
        svg.disk(eps);
        for s in group.iter() {
            svg.curve(&s.curve, CURVE_COLOR);
            svg.curve(&s.curve.reflected(), CURVE_COLOR);
        }
        files.push((format!("fig5{tag}.svg"), svg.finish()));
    }
    let (_, theta_c) = tangent_params(eps)?;
    let rows: Vec<Value> = sols.iter().map(|s| annulus_summary(s, theta_c)).collect();
    Ok(("fig5", json!({"epsilon": eps, "per_region": 16}), json!({"curves": rows}), files))
}

/// Foliations and value contours for four obstacle radii.
fn fig6() -> Result<FigureData> {
    let mut files = Vec::new();
    let mut rows = Vec::new();
    for eps in [0.75, 0.5, 0.25, 0.1] {
        let sols = foliate_annulus_with(eps, 8, 301)?;
        let v = value_grid(eps, 160, 320, 128).with_context(|| format!("value grid at eps {eps}"))?;
        let mut svg = Svg::new();
        svg.disk(eps).contours(&v);
        for s in &sols {
            svg.curve(&s.curve, CURVE_COLOR);
            svg.curve(&s.curve.reflected(), CURVE_COLOR);
        }
        let curves: Vec<SampledCurve> = sols.iter().map(|s| s.curve.clone()).collect();
        files.push((format!("fig6_eps{eps}.csv"), curves_csv(&curves)));
        files.push((format!("fig6_value_eps{eps}.csv"), v.to_csv()));
        files.push((format!("fig6_eps{eps}.svg"), svg.finish()));
        rows.push(json!({"epsilon": eps, "curves": curves.len(), "value": value_summary(&v)?}));
    }
    Ok((
        "fig6",
        json!({"epsilon": [0.75, 0.5, 0.25, 0.1], "grid": [160, 320]}),
        json!({"panels": rows}),
        files,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_names() {
        assert_eq!(parse_stencil("sixteen"), Ok(Stencil::Sixteen));
        assert_eq!(parse_stencil("primitive:5"), Ok(Stencil::Primitive(5)));
        assert_eq!(parse_stencil("nested:2"), Ok(Stencil::refinement(2)));
        for bad in ["", "nested", "nested:x", "hex:3", "sixteen:1"] {
            assert!(parse_stencil(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn rim_angles_skip_the_release_point() {
        assert_eq!(rim_angles(4).len(), 4);
        let odd = rim_angles(5);
        assert_eq!(odd.len(), 4);
        assert!(odd.iter().all(|t| t.abs() > 0.1 && t.abs() < PI));
    }
}
