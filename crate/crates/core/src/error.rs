use thiserror::Error;

use crate::minimizer::SolveStats;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("point lies within {distance:e} of the singular point (guard radius {guard:e})")]
    Singularity { distance: f64, guard: f64 },

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("cell {cell} is degenerate (k-volume {volume:e})")]
    DegenerateCell { cell: usize, volume: f64 },

    #[error("face {0} is not a boundary face")]
    NotBoundary(usize),

    #[error("quadrature failed after {subdivisions} subdivisions (error estimate {estimate:e}, target {target:e})")]
    Quadrature {
        subdivisions: usize,
        estimate: f64,
        target: f64,
    },

    #[error("line search stalled at iteration {}", .stats.iterations)]
    Stall { stats: Box<SolveStats> },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
