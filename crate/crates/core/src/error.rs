use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{0} is undefined for 0-forms")]
    DegreeZero(&'static str),
    #[error("unsupported combination: {0}")]
    Unsupported(String),
    #[error("singular map: {0}")]
    Singular(String),
    #[error("degenerate cell {cell}: measure {measure:e}")]
    DegenerateCell { cell: usize, measure: f64 },
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("unknown face of dimension {dim}: {vertices:?}")]
    UnknownFace { dim: usize, vertices: Vec<usize> },
    #[error("point {point:?} lies outside cell {cell}")]
    OutsideCell { cell: usize, point: Vec<f64> },
    #[error("illegal derivative pair: {0}")]
    IllegalPair(String),
    #[error("coefficient field is not symmetric positive definite on cell {cell}: {reason}")]
    NotSpd { cell: usize, reason: String },
    #[error("dense computation of size {size} exceeds cap {cap}")]
    DimensionCap { size: usize, cap: usize },
    #[error("linear solve failed: {0}")]
    Solver(String),
    #[error("level {level}: {source}")]
    AtLevel {
        level: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("dof {dof} is supported near vertex {vertex}")]
    NotFar { vertex: usize, dof: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
