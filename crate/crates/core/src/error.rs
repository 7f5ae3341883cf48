use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConeError {
    #[error("dimension mismatch: expected {expected} coordinates, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("point lies outside the source region of the map")]
    OutsideSource,

    #[error("grid needs at least 3 nodes per direction, got {radial}x{angular}")]
    GridTooSmall { radial: usize, angular: usize },

    #[error("field has no samples")]
    EmptyField,

    #[error("gradient vanishes; quotient undefined")]
    ZeroGradient,

    #[error("degenerate ball (no grid cells or zero measure)")]
    DegenerateBall,

    #[error("unknown test field family `{0}`")]
    UnknownField(String),

    #[error("level {alpha} is degenerate: the level set covers the whole truncated domain")]
    DegenerateLevel { alpha: f64 },

    #[error("half-cone values disagree at the vertex (gap {value}, allowed {allowed})")]
    VertexMismatch { value: f64, allowed: f64 },

    #[error("wrong domain variant: {0}")]
    WrongVariant(String),

    #[error("{0}")]
    Divergent(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = ConeError> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> ConeError {
    ConeError::InvalidParameter(msg.into())
}
