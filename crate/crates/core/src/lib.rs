//! Least-time curves in the field of an attracting inverse-square centre.
//!
//! A particle released at rest from `(1, 0)` moves with speed
//! `sqrt(1/r - 1)`. The crate computes the time-optimal curves to any point of
//! the unit disk (smooth strong solutions, or two radial legs through the
//! origin), the minimisers when an obstacle `r >= eps` is imposed, the value
//! function they induce, and an independent grid-graph bound for checking.

// `!(x > 0.0)` is used on purpose: it rejects NaN along with the range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod annulus;
pub mod field;
pub mod geom;
pub mod oracle;
pub mod quad;
pub mod strong;
pub mod variational;
pub mod weak;

use thiserror::Error;

pub use annulus::{
    convergence_study, foliate_annulus, solve_constrained, tangent_params, AnnulusError, AnnulusSolution,
    ConvergenceRow, Regime,
};
pub use field::{eikonal_residual, orthogonality_check, value_grid, Family, FieldError, ValueGrid};
pub use geom::{
    curve_distance, tof_sampled, CartPoint, GeomError, PolarPoint, Sample, SampledCurve, TimeOfFlight,
};
pub use oracle::{oracle_min_time, GridGraph, OracleError, Stencil};
pub use strong::{
    critical_radius, d_from_rc, max_angle, sample_strong, shoot, theta_of_r, tof_strong, Branch, Half,
    StrongError, StrongSolution, SECTOR_LIMIT,
};
pub use variational::{monotonize, symmetrize, VariationalError};
pub use weak::{corner_residual, sample_weak, tof_weak, DiskSolution, WeakError, WeakSolution};

/// Any failure raised by the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Strong(#[from] StrongError),
    #[error(transparent)]
    Weak(#[from] WeakError),
    #[error(transparent)]
    Variational(#[from] VariationalError),
    #[error(transparent)]
    Annulus(#[from] AnnulusError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Field(#[from] FieldError),
}
