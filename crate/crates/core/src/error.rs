use thiserror::Error;

use crate::lattice::Sector;

pub type Result<T> = std::result::Result<T, ApwtError>;

#[derive(Debug, Error)]
pub enum ApwtError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite sample at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("point ({k}, {kx}) lies on the light cone")]
    LightCone { k: f64, kx: f64 },

    #[error("sector {0} is not supported here: {1}")]
    UnsupportedSector(Sector, &'static str),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),

    #[error("far-field asymptotic invalid: omega*r/c = {kr:.3} < {limit}")]
    NearField { kr: f64, limit: f64 },

    #[error("step too large, y-discretisation dominates: {0}")]
    Resolution(String),

    #[error("APWF/1 format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
