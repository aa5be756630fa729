//! Curved quadratic finite elements for radial cavitation in planar
//! nonlinear elasticity.
//!
//! The crate builds annular meshes of six-node curved triangles around a
//! small hole, grades layer thicknesses and angular resolution toward the
//! hole, interpolates radially symmetric deformations onto the mesh, and
//! minimizes a polyconvex stored energy over the resulting discrete space.
//!
//! Main entry points:
//!
//! * [`meshgen::LayerSchedule::plan`] turns a hole radius and target mesh
//!   size into a graded layer schedule, and [`meshgen::AnnulusMesh::build`]
//!   realizes it as a mesh.
//! * [`oracle::solve_radial`] computes the radially symmetric minimizer to
//!   high accuracy with a one-dimensional Hermite discretization.
//! * [`solver::minimize`] runs the full two-dimensional minimization.
//! * [`analysis`] measures interpolation and discretization errors and
//!   fits convergence rates.
//!
//! Element loops run in parallel via rayon when the `parallel` feature
//! (default) is enabled; every result is bitwise identical to the
//! sequential path because reductions happen in element order.

pub mod energy;
pub mod exec;
pub mod fem;
pub mod geometry;
pub mod meshgen;
pub mod oracle;
pub mod quadrature;

mod accum;

/// Errors shared across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("polar radius must be positive, got {0}")]
    ZeroRadius(f64),
    #[error("arc from angle {from} to {to} subtends half a turn or more; its midpoint is ambiguous")]
    AmbiguousArc { from: f64, to: f64 },
    #[error("infeasible configuration: {0}")]
    InfeasibleConfig(String),
    #[error("invalid layer schedule: {0}")]
    InvalidSchedule(String),
    #[error("mesh construction lost conformity: {0}")]
    NonConforming(String),
    #[error("jacobian determinant {0} is not positive")]
    SingularJacobian(f64),
    #[error("radial profile solve stalled: {0}")]
    OracleDiverged(String),
    #[error("line search failed: {0}")]
    LineSearchFailed(String),
    #[error("no convergence within {0} iterations")]
    MaxIterations(usize),
    #[error("initial guess is not orientation preserving")]
    InfeasibleInitialGuess,
    #[error("not enough data: {0}")]
    InsufficientData(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
