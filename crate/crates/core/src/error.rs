use thiserror::Error;

/// Errors raised while building discretizations, solving, or running studies.
#[derive(Debug, Error)]
pub enum FemError {
    #[error("a mesh needs at least one subdivision per side")]
    EmptyMesh,

    #[error("unsupported polynomial degree {0}")]
    UnsupportedDegree(usize),

    #[error("no quadrature rule of degree {0} (supported: 1..=12)")]
    QuadratureDegree(usize),

    #[error("spaces are defined on different meshes")]
    MeshMismatch,

    #[error("point ({0}, {1}) lies outside the unit square")]
    PointOutside(f64, f64),

    #[error("clamped multipliers need an internal triangle; mesh with n = {0} has none")]
    NoInternalTriangle(usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("relative residual {achieved:.3e} did not reach tolerance {tolerance:.1e}")]
    ToleranceNotReached { achieved: f64, tolerance: f64 },

    #[error("unknown example `{0}` (expected one of ss1, ss2, ss3, cl1, cl2)")]
    UnknownExample(String),

    #[error("example {example} uses {expected} boundary conditions")]
    IncompatibleExample { example: String, expected: String },

    #[error("exact field has zero norm; relative error undefined")]
    ZeroNorm,

    #[error("laplacian power must be 1, 2 or 3, got {0}")]
    LaplacianPower(usize),

    #[error("invalid study configuration: {0}")]
    InvalidConfig(String),

    #[error("level {level} ({elements} elements): {source}")]
    AtLevel {
        level: usize,
        elements: usize,
        #[source]
        source: Box<FemError>,
    },
}

pub type Result<T> = std::result::Result<T, FemError>;
