use thiserror::Error;

/// Errors produced by the geometry, energy and spectral routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("mesh quality: {0}")]
    MeshQuality(String),
    #[error("non-manifold input: {0}")]
    NonManifold(String),
    #[error("point within {distance:.3e} of the projection pole")]
    NearPole { distance: f64 },
    #[error("invalid input: {0}")]
    Input(String),
    #[error("insufficient resolution: {0}")]
    Resolution(String),
    #[error("parameter outside domain: {0}")]
    Domain(String),
    #[error("singular point: {0}")]
    Singularity(String),
    #[error("degenerate parameter: {0}")]
    DegenerateParameter(String),
    #[error("surface is not minimal (mean curvature rms {rms:.3e} > {threshold:.3e})")]
    NotMinimal { rms: f64, threshold: f64 },
    #[error("unsupported surface: {0}")]
    UnsupportedSurface(String),
    #[error("insufficient data: need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("fixture mismatch: {0}")]
    Fixture(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
