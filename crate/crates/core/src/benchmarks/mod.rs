//! Verification cases with analytic sharp-interface references: an embedded
//! phase at capillary equilibrium, a double triple junction, a shrinking
//! grain and the solutal Stefan problem.

pub mod embedding;
pub mod equilibrium;
pub mod grain;
pub mod runner;
pub mod stefan;
pub mod study;
pub mod triple;

pub use embedding::{concentration_shift, laplace_error, EmbeddingSpec, LaplaceMeasure};
pub use equilibrium::EquilibriumDetector;
pub use grain::{area_rate, SingleGrainSpec};
pub use runner::{run, BenchmarkReport, Case, Control, Frame, IntegratorConfig, Observer, RunError, RunSpec, Termination};
pub use stefan::{stefan_fit, stefan_growth_constant, StefanSpec};
pub use study::{
    decreases_monotonically, refinement_study, work_precision, write_refinement, write_summary, write_work_precision, RefinementRow,
    TimeSeriesWriter, WorkPrecisionRow,
};
pub use triple::{dihedral_angle, theta_eq, AngleMethod, DihedralMeasure, TripleJunctionSpec};

use crate::contour::ContourError;
use crate::field::FieldError;
use crate::model::{ParamError, PhysicalParams};
use thiserror::Error;

/// Gibbs prefactor of the standard parameter set.
pub const STANDARD_K: f64 = 500.0;
/// Equilibrium concentration of the α phase.
pub const C0_ALPHA: f64 = 0.02;
/// Equilibrium concentration of the β phase.
pub const C0_BETA: f64 = 0.98;

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("geometry: {0}")]
    Geometry(String),
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error("growth constant equation has no sign change in [{lo}, {hi}]")]
    NoRoot { lo: f64, hi: f64 },
    #[error("no equilibrium angle for γ_ββ = {gb}, γ_αβ = {ab}")]
    AngleDomain { gb: f64, ab: f64 },
    #[error("{0}")]
    Grid(#[from] crate::grid::GridError),
}

/// Interface width of refinement studies, `W = 3 Δx^0.4`.
pub fn refinement_width(dx: f64) -> f64 {
    3.0 * dx.powf(0.4)
}

/// Two-phase α/β parameters with γ = M = 1 and `k = 500`.
pub fn standard_params(width: f64, diffusivity: f64) -> Result<PhysicalParams, ParamError> {
    PhysicalParams::uniform(
        2,
        1.0,
        1.0,
        width,
        vec![diffusivity; 2],
        vec![STANDARD_K; 2],
        vec![C0_ALPHA, C0_BETA],
    )
}

/// Number of cells resolving `length` at spacing `dx`.
pub(crate) fn cells(length: f64, dx: f64) -> Result<usize, BenchError> {
    let n = (length / dx).round();
    if !(n >= 3.0) || ((n * dx - length).abs() > 1e-9 * length) {
        return Err(BenchError::Geometry(format!("length {length} is not a multiple of dx = {dx}")));
    }
    Ok(n as usize)
}

/// Euclidean distance of a cell center from a point.
pub(crate) fn distance(x: &[f64], c: &[f64]) -> f64 {
    x.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}
