//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by loaders, geometry, fitting and the fusion pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// Malformed on-disk data; `detail` names the offending key, offset or count.
    #[error("format error in {path}: {detail}")]
    Format { path: String, detail: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("non-finite value at point {index}")]
    NonFinite { index: usize },

    /// A direction with zero length in the relevant plane has no angle.
    #[error("degenerate direction: zero-length vector")]
    DegenerateDirection,

    #[error("point cloud carries no beam ids")]
    MissingBeamIds,

    #[error("beam id {beam} out of range for {rows} rows")]
    BeamIdOutOfRange { beam: u32, rows: usize },

    #[error("point at depth {depth:.3e} m is behind the camera (threshold {eps:.1e} m)")]
    BehindCamera { depth: f64, eps: f64 },

    #[error("spline fit needs at least 3 control points, got {0}")]
    InsufficientControls(usize),

    #[error("degenerate control-point geometry: {0}")]
    DegenerateGeometry(String),

    #[error("linear solve failed (condition estimate {condition:.3e})")]
    Numerical { condition: f64 },

    #[error("shape mismatch: {left} vs {right}")]
    ShapeMismatch { left: String, right: String },
}

pub type Result<T> = std::result::Result<T, Error>;
