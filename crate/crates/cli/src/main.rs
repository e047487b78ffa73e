//! `brachisto`: solve, sample and check least-time curves from the shell.
//!
//! Exit status is 0 on success, 2 when a computed quantity breaches its
//! tolerance, and 1 on usage or input errors.

mod commands;
mod svg;

use clap::{Parser, Subcommand, ValueEnum};
use std::collections::BTreeMap;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Debug, Parser)]
#[command(name = "brachisto", version, about = "Least-time curves in an inverse-square field")]
pub struct Cli {
    /// Directory for CSV, JSON and SVG artifacts.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Tolerance override `name=value`; repeatable.
    #[arg(long, global = true, value_parser = parse_tol)]
    pub tol: Vec<(String, f64)>,
    /// Read input angles in degrees. Output is always in radians.
    #[arg(long, global = true)]
    pub degrees: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimal curve from (1, 0) to a terminal point.
    Solve {
        #[arg(long, allow_hyphen_values = true)]
        theta_f: f64,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        terminal_r: f64,
        #[arg(long, default_value_t = 1001)]
        samples: usize,
    },
    /// A family of optimal curves covering the disk or annulus.
    Foliate {
        #[arg(long, default_value_t = 16)]
        count: usize,
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 501)]
        samples: usize,
    },
    /// Value function on a polar grid and its eikonal residual.
    Value {
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 200)]
        nr: usize,
        #[arg(long, default_value_t = 400)]
        ntheta: usize,
        #[arg(long, default_value_t = 256)]
        curves: usize,
        /// Also write a contour plot.
        #[arg(long)]
        svg: bool,
    },
    /// Shortest grid-graph time to a target, compared with the analytic value.
    Oracle {
        #[arg(long, default_value_t = 0.0)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        target_r: f64,
        #[arg(long, allow_hyphen_values = true)]
        target_theta: f64,
        #[arg(long, default_value_t = 400)]
        nr: usize,
        #[arg(long, default_value_t = 800)]
        ntheta: usize,
        /// `sixteen`, `primitive:K` or `nested:LEVEL`.
        #[arg(long, default_value = "nested:2", value_parser = commands::parse_stencil)]
        stencil: brachisto_core::Stencil,
    },
    /// Distance between constrained and unconstrained minimisers as the obstacle shrinks.
    Converge {
        #[arg(long, allow_hyphen_values = true)]
        theta_f: f64,
        #[arg(long, value_delimiter = ',', default_value = "0.4,0.2,0.1,0.05")]
        eps: Vec<f64>,
    },
    /// Residual checks on computed minimisers.
    #[command(group = clap::ArgGroup::new("kind").required(true).args(["stationarity", "corner"]))]
    Check {
        /// First variations of the constrained minimiser.
        #[arg(long)]
        stationarity: bool,
        /// Corner condition of the weak solution at the origin.
        #[arg(long)]
        corner: bool,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, allow_hyphen_values = true)]
        theta_f: f64,
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
    /// Data and plots for one of the reference figures.
    Repro { figure: Figure },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

fn parse_tol(s: &str) -> Result<(String, f64), String> {
    let (name, value) = s.split_once('=').ok_or_else(|| format!("expected name=value, got {s:?}"))?;
    let value: f64 = value.parse().map_err(|e| format!("{value:?}: {e}"))?;
    if !(value.is_finite() && value >= 0.0) {
        return Err(format!("tolerance {name} must be finite and non-negative"));
    }
    Ok((name.to_string(), value))
}

/// Outcome of a subcommand before it is written out.
pub struct Report {
    pub command: &'static str,
    /// File name of the metadata record under `--out`.
    pub json_name: String,
    pub params: serde_json::Value,
    pub results: serde_json::Value,
    pub tolerances: BTreeMap<String, f64>,
    pub files: Vec<(String, String)>,
    pub passed: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match commands::run(&cli) {
        Ok(report) => match emit(&cli, &report) {
            Ok(()) if report.passed => ExitCode::SUCCESS,
            Ok(()) => {
                eprintln!("{}: tolerance breached", report.command);
                ExitCode::from(2)
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn emit(cli: &Cli, report: &Report) -> anyhow::Result<()> {
    let meta = serde_json::json!({
        "command": report.command,
        "params": report.params,
        "results": report.results,
        "tolerances": report.tolerances,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let text = serde_json::to_string_pretty(&meta)? + "\n";
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)?;
        for (name, body) in &report.files {
            std::fs::write(dir.join(name), body)?;
        }
        std::fs::write(dir.join(&report.json_name), &text)?;
    }
    // A closed pipe downstream is not an error of ours.
    match std::io::stdout().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}
